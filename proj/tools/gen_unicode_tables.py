#!/usr/bin/env python3
"""Generates src/unicode_tables.inc from Python's unicodedata.

The C++ normalizer needs four tables:
  - canonical decompositions (one level; recursion happens at runtime),
  - nonzero canonical combining classes,
  - primary composition pairs (canonical, non-excluded, starter-first),
  - simple lowercase mappings (single codepoint to single codepoint).

Hangul syllables are handled algorithmically in C++ and are skipped here.
"""

import sys
import unicodedata

S_BASE, L_COUNT, V_COUNT, T_COUNT = 0xAC00, 19, 21, 28
S_COUNT = L_COUNT * V_COUNT * T_COUNT  # 11172


def is_hangul_syllable(cp):
    return S_BASE <= cp < S_BASE + S_COUNT


def main(out_path):
    decomp = []  # (cp, a, b); b == 0 for singleton decompositions
    ccc = []     # (cp, class)
    lower = []   # (cp, lower_cp)

    for cp in range(0x110000):
        if 0xD800 <= cp <= 0xDFFF:
            continue
        ch = chr(cp)

        c = unicodedata.combining(ch)
        if c != 0:
            ccc.append((cp, c))

        if not is_hangul_syllable(cp):
            d = unicodedata.decomposition(ch)
            if d and not d.startswith("<"):  # canonical only
                parts = [int(p, 16) for p in d.split()]
                assert 1 <= len(parts) <= 2, hex(cp)
                a = parts[0]
                b = parts[1] if len(parts) == 2 else 0
                decomp.append((cp, a, b))

        lo = ch.lower()
        if len(lo) == 1 and lo != ch:
            lower.append((cp, ord(lo)))

    # Primary composites: canonical two-element decomposition whose first
    # element is a starter, and which NFC actually recomposes (this excludes
    # the composition-exclusion characters without needing the explicit list).
    comp = []
    for cp, a, b in decomp:
        if b == 0:
            continue
        if unicodedata.combining(chr(a)) != 0:
            continue
        if unicodedata.normalize("NFC", chr(a) + chr(b)) == chr(cp):
            comp.append((a, b, cp))
    comp.sort()

    with open(out_path, "w") as f:
        f.write("// Generated by tools/gen_unicode_tables.py "
                f"(Unicode {unicodedata.unidata_version}). Do not edit.\n\n")

        f.write(f"static const DecompEntry kDecomp[{len(decomp)}] = {{\n")
        for cp, a, b in decomp:
            f.write(f"  {{0x{cp:x}, 0x{a:x}, 0x{b:x}}},\n")
        f.write("};\n\n")

        f.write(f"static const CccEntry kCcc[{len(ccc)}] = {{\n")
        for cp, c in ccc:
            f.write(f"  {{0x{cp:x}, {c}}},\n")
        f.write("};\n\n")

        f.write(f"static const CompEntry kComp[{len(comp)}] = {{\n")
        for a, b, cp in comp:
            f.write(f"  {{0x{a:x}, 0x{b:x}, 0x{cp:x}}},\n")
        f.write("};\n\n")

        f.write(f"static const LowerEntry kLower[{len(lower)}] = {{\n")
        for cp, lo in lower:
            f.write(f"  {{0x{cp:x}, 0x{lo:x}}},\n")
        f.write("};\n")

    print(f"decomp={len(decomp)} ccc={len(ccc)} comp={len(comp)} "
          f"lower={len(lower)}")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "src/unicode_tables.inc")
