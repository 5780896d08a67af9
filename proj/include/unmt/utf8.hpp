#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace unmt {

// Minimal strict UTF-8 codec. Decoding rejects overlong forms, surrogates
// and out-of-range scalars.

bool utf8_decode(std::string_view s, std::vector<char32_t>& out);

void utf8_append(std::string& out, char32_t cp);

std::string utf8_encode(const std::vector<char32_t>& cps);

}  // namespace unmt
