// SPDX-License-Identifier: Apache-2.0
#include "translit/unicode.hpp"

#include <unicode/normalizer2.h>
#include <unicode/unistr.h>

#include "translit/errors.hpp"

namespace translit {

namespace {

std::u32string to_u32(const icu::UnicodeString& s) {
  std::u32string out(static_cast<std::size_t>(s.countChar32()), U'\0');
  UErrorCode status = U_ZERO_ERROR;
  s.toUTF32(reinterpret_cast<UChar32*>(out.data()), static_cast<int32_t>(out.size()), status);
  if (U_FAILURE(status)) throw Error(std::string("UTF-32 conversion failed: ") + u_errorName(status));
  return out;
}

icu::UnicodeString from_u32(std::u32string_view text) {
  return icu::UnicodeString::fromUTF32(reinterpret_cast<const UChar32*>(text.data()),
                                       static_cast<int32_t>(text.size()));
}

}  // namespace

std::u32string utf8_to_u32(std::string_view utf8) {
  return to_u32(icu::UnicodeString::fromUTF8(
      icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size()))));
}

std::string u32_to_utf8(std::u32string_view text) {
  std::string out;
  from_u32(text).toUTF8String(out);
  return out;
}

std::u32string nfc(std::u32string_view text) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* norm = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw Error(std::string("NFC unavailable: ") + u_errorName(status));
  icu::UnicodeString out = norm->normalize(from_u32(text), status);
  if (U_FAILURE(status)) throw Error(std::string("NFC failed: ") + u_errorName(status));
  return to_u32(out);
}

}  // namespace translit
