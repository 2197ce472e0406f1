// SPDX-License-Identifier: Apache-2.0
//
// UTF-8 / UTF-32 conversion and Unicode property lookups, backed by ICU.
// Everything that crosses a text boundary (dataset load, transcription
// import, evaluation) goes through nfc().
#pragma once

#include <string>
#include <string_view>

namespace rtlocr::text {

std::u32string utf8_to_u32(std::string_view utf8);
std::string u32_to_utf8(std::u32string_view text);

/// Canonical composition (NFC).
std::u32string nfc(std::u32string_view text);
std::string nfc(std::string_view utf8);

/// Strips leading and trailing Unicode white space.
std::u32string trim(std::u32string_view text);

bool is_punctuation(char32_t c);
bool is_separator(char32_t c);  // Z* categories plus ASCII/Unicode white space
bool is_nonspacing_mark(char32_t c);

}  // namespace rtlocr::text
