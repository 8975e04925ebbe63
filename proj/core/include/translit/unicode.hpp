// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>

namespace translit {

/// Decodes UTF-8 into code points; ill-formed bytes become U+FFFD.
std::u32string utf8_to_u32(std::string_view utf8);
std::string u32_to_utf8(std::u32string_view text);

/// Canonical composition (NFC).
std::u32string nfc(std::u32string_view text);

/// Glyph used for UNK when rendering decoded output.
inline constexpr char32_t kReplacementChar = U'\uFFFD';

}  // namespace translit
