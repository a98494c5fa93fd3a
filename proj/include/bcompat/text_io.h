// Copyright 2026 The bcompat Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Small text helpers shared by the file formats: line reading, CSV fields,
// UTF-8 code points and stable number formatting.

#ifndef BCOMPAT_TEXT_IO_H_
#define BCOMPAT_TEXT_IO_H_

#include <string>
#include <string_view>
#include <vector>

namespace bcompat {

// Reads a whole file; throws Error(kIoError) when it cannot be opened.
std::string ReadFile(const std::string& path);

// Writes `contents` to `path`, creating parent directories.
void WriteFile(const std::string& path, std::string_view contents);

// Splits on '\n', dropping one trailing '\r' per line. A final empty line
// after the last newline is not returned.
std::vector<std::string> SplitLines(std::string_view text);

// RFC 4180-style field split: fields may be double-quoted, with "" as an
// escaped quote inside a quoted field.
std::vector<std::string> SplitCsvLine(std::string_view line);

// Quotes a field only when it contains a comma, quote or newline.
std::string CsvField(std::string_view field);

// Shortest representation that round-trips to the same double.
std::string FormatDouble(double v);

// Fixed 4-decimal rendering used in console summaries.
std::string FormatFixed4(double v);

// Decodes UTF-8 into code points; throws Error(kParseError) on bad input.
std::u32string DecodeUtf8(std::string_view text);
std::string EncodeUtf8(char32_t cp);
std::string EncodeUtf8(std::u32string_view cps);

std::string Trim(std::string_view s);

// Parses a whole string as an integer / double; throws Error(kParseError).
long long ParseInt(std::string_view s);
double ParseDouble(std::string_view s);

}  // namespace bcompat

#endif  // BCOMPAT_TEXT_IO_H_
