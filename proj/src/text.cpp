// SPDX-License-Identifier: Apache-2.0
#include "rtlocr/text.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include "rtlocr/error.hpp"

namespace rtlocr::text {

namespace {

icu::UnicodeString to_icu(std::u32string_view text) {
  return icu::UnicodeString::fromUTF32(reinterpret_cast<const UChar32*>(text.data()),
                                       static_cast<int32_t>(text.size()));
}

std::u32string from_icu(const icu::UnicodeString& s) {
  std::u32string out;
  out.reserve(static_cast<size_t>(s.length()));
  for (int32_t i = 0; i < s.length();) {
    UChar32 c = s.char32At(i);
    out.push_back(static_cast<char32_t>(c));
    i += U16_LENGTH(c);
  }
  return out;
}

const icu::Normalizer2& nfc_instance() {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* n = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status) || n == nullptr) {
    throw Error(Errc::kInvalidArgument, "ICU NFC normalizer unavailable");
  }
  return *n;
}

}  // namespace

std::u32string utf8_to_u32(std::string_view utf8) {
  return from_icu(icu::UnicodeString::fromUTF8(
      icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size()))));
}

std::string u32_to_utf8(std::u32string_view text) {
  std::string out;
  to_icu(text).toUTF8String(out);
  return out;
}

std::u32string nfc(std::u32string_view text) {
  UErrorCode status = U_ZERO_ERROR;
  icu::UnicodeString normalized = nfc_instance().normalize(to_icu(text), status);
  if (U_FAILURE(status)) throw Error(Errc::kInvalidArgument, "normalization failed");
  return from_icu(normalized);
}

std::string nfc(std::string_view utf8) { return u32_to_utf8(nfc(utf8_to_u32(utf8))); }

std::u32string trim(std::u32string_view text) {
  size_t begin = 0;
  size_t end = text.size();
  while (begin < end && u_isUWhiteSpace(static_cast<UChar32>(text[begin]))) ++begin;
  while (end > begin && u_isUWhiteSpace(static_cast<UChar32>(text[end - 1]))) --end;
  return std::u32string(text.substr(begin, end - begin));
}

bool is_punctuation(char32_t c) { return u_ispunct(static_cast<UChar32>(c)); }

bool is_separator(char32_t c) {
  const auto cp = static_cast<UChar32>(c);
  const int8_t type = u_charType(cp);
  return type == U_SPACE_SEPARATOR || type == U_LINE_SEPARATOR ||
         type == U_PARAGRAPH_SEPARATOR || u_isUWhiteSpace(cp);
}

bool is_nonspacing_mark(char32_t c) {
  return u_charType(static_cast<UChar32>(c)) == U_NON_SPACING_MARK;
}

}  // namespace rtlocr::text
