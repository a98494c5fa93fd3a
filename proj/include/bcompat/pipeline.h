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

// Downstream impact of a character recognizer update on a word blacklist.
//
// A blacklisted word is missed when any of its characters is misrecognized.
// With independent per-character errors the miss probability is
//
//   Error(word) = 1 - prod_i Accuracy(c_i).
//
// Characters are Unicode code points and case sensitive.

#ifndef BCOMPAT_PIPELINE_H_
#define BCOMPAT_PIPELINE_H_

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "bcompat/prediction_log.h"

namespace bcompat {

struct CharAccuracyTable {
  std::string model_id;
  std::map<char32_t, double> accuracy;
};

// Class label -> recognized character.
using Charmap = std::map<Label, char32_t>;

// CSV "label,char"; an optional header row "label,char" is skipped.
Charmap ParseCharmapCsv(std::string_view text, const std::string& source);
Charmap LoadCharmap(const std::string& path);

// Per-character accuracy over the records of each true label. Characters
// without records are omitted. Throws kCharmapIncomplete naming the labels of
// the log's label set that `charmap` misses.
CharAccuracyTable CharAccuracyFromLog(const PredictionLog& log,
                                      const Charmap& charmap);

// Throws kEmptyWord, or kUnknownCharacter naming the word and character.
double WordError(std::u32string_view word, const CharAccuracyTable& table);
double WordError(std::string_view utf8_word, const CharAccuracyTable& table);

struct BlacklistRow {
  std::string word;
  double error_h1 = 0.0;
  double error_h2 = 0.0;
  double delta = 0.0;  // error_h2 - error_h1.
};

// One row per word, sorted by descending delta, then by word.
std::vector<BlacklistRow> BlacklistReport(const std::vector<std::string>& words,
                                          const CharAccuracyTable& h1,
                                          const CharAccuracyTable& h2);

// CSV "char,accuracy" in code point order, and its inverse.
std::string SerializeCharAccuracyCsv(const CharAccuracyTable& table);
CharAccuracyTable ParseCharAccuracyCsv(std::string_view text,
                                       const std::string& source);

// One word per line; blank lines are skipped, other whitespace is kept.
std::vector<std::string> ParseBlacklist(std::string_view text);

// CSV "word,error_h1,error_h2,delta".
std::string BlacklistReportCsv(const std::vector<BlacklistRow>& rows);

}  // namespace bcompat

#endif  // BCOMPAT_PIPELINE_H_
