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

#include "bcompat/pipeline.h"

#include <algorithm>

#include "bcompat/error.h"
#include "bcompat/text_io.h"

namespace bcompat {
namespace {

// Exactly one code point from a CSV field.
char32_t SingleChar(const std::string& field) {
  const std::u32string cps = DecodeUtf8(field);
  if (cps.size() != 1) {
    throw Error(ErrorCode::kParseError,
                "expected a single character, got '" + field + "'");
  }
  return cps[0];
}

template <typename Fn>
void ForEachCsvRow(std::string_view text, const std::string& source,
                   const std::string& header, Fn fn) {
  const auto lines = SplitLines(text);
  for (size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    if (i == 0 && lines[i] == header) continue;
    try {
      const auto fields = SplitCsvLine(lines[i]);
      if (fields.size() != 2) {
        throw Error(ErrorCode::kParseError,
                    "expected 2 fields, got " + std::to_string(fields.size()));
      }
      fn(fields);
    } catch (const Error& e) {
      throw ParseError(source, static_cast<int>(i) + 1, e.message());
    }
  }
}

}  // namespace

Charmap ParseCharmapCsv(std::string_view text, const std::string& source) {
  Charmap map;
  ForEachCsvRow(text, source, "label,char", [&](const auto& f) {
    const auto label = static_cast<Label>(ParseInt(Trim(f[0])));
    if (!map.emplace(label, SingleChar(f[1])).second) {
      throw Error(ErrorCode::kParseError,
                  "label " + std::to_string(label) + " mapped twice");
    }
  });
  return map;
}

Charmap LoadCharmap(const std::string& path) {
  return ParseCharmapCsv(ReadFile(path), path);
}

CharAccuracyTable CharAccuracyFromLog(const PredictionLog& log,
                                      const Charmap& charmap) {
  std::string missing;
  for (const Label l : log.label_set) {
    if (!charmap.count(l)) {
      missing += (missing.empty() ? "" : ", ") + std::to_string(l);
    }
  }
  if (!missing.empty()) {
    throw Error(ErrorCode::kCharmapIncomplete,
                "charmap has no character for labels " + missing);
  }
  std::map<char32_t, std::pair<size_t, size_t>> tally;  // correct, total.
  for (const auto& r : log.records) {
    const auto it = charmap.find(r.true_label);
    if (it == charmap.end()) {
      throw Error(ErrorCode::kCharmapIncomplete,
                  "charmap has no character for label " +
                      std::to_string(r.true_label));
    }
    auto& [correct, total] = tally[it->second];
    correct += r.correct();
    ++total;
  }
  CharAccuracyTable table;
  table.model_id = log.model_id;
  for (const auto& [c, t] : tally) {
    table.accuracy[c] =
        static_cast<double>(t.first) / static_cast<double>(t.second);
  }
  return table;
}

double WordError(std::u32string_view word, const CharAccuracyTable& table) {
  if (word.empty()) throw Error(ErrorCode::kEmptyWord, "word is empty");
  std::vector<double> acc;
  acc.reserve(word.size());
  for (const char32_t c : word) {
    const auto it = table.accuracy.find(c);
    if (it == table.accuracy.end()) {
      throw Error(ErrorCode::kUnknownCharacter,
                  "character '" + EncodeUtf8(c) + "' of word '" +
                      EncodeUtf8(word) + "' is not in table '" +
                      table.model_id + "'");
    }
    acc.push_back(it->second);
  }
  // A fixed multiplication order makes the result independent of the
  // character order.
  std::sort(acc.begin(), acc.end());
  double product = 1.0;
  for (const double a : acc) product *= a;
  return 1.0 - product;
}

double WordError(std::string_view utf8_word, const CharAccuracyTable& table) {
  return WordError(std::u32string_view(DecodeUtf8(utf8_word)), table);
}

std::vector<BlacklistRow> BlacklistReport(const std::vector<std::string>& words,
                                          const CharAccuracyTable& h1,
                                          const CharAccuracyTable& h2) {
  std::vector<BlacklistRow> rows;
  rows.reserve(words.size());
  for (const auto& w : words) {
    BlacklistRow row;
    row.word = w;
    row.error_h1 = WordError(std::string_view(w), h1);
    row.error_h2 = WordError(std::string_view(w), h2);
    row.delta = row.error_h2 - row.error_h1;
    rows.push_back(std::move(row));
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const BlacklistRow& a, const BlacklistRow& b) {
                     if (a.delta != b.delta) return a.delta > b.delta;
                     return a.word < b.word;
                   });
  return rows;
}

std::string SerializeCharAccuracyCsv(const CharAccuracyTable& table) {
  std::string out = "char,accuracy\n";
  for (const auto& [c, a] : table.accuracy) {
    out += CsvField(EncodeUtf8(c)) + "," + FormatDouble(a) + "\n";
  }
  return out;
}

CharAccuracyTable ParseCharAccuracyCsv(std::string_view text,
                                       const std::string& source) {
  CharAccuracyTable table;
  table.model_id = source;
  ForEachCsvRow(text, source, "char,accuracy", [&](const auto& f) {
    const char32_t c = SingleChar(f[0]);
    const double a = ParseDouble(Trim(f[1]));
    if (!(a >= 0.0 && a <= 1.0)) {
      throw Error(ErrorCode::kParseError, "accuracy must lie in [0, 1]");
    }
    if (!table.accuracy.emplace(c, a).second) {
      throw Error(ErrorCode::kParseError,
                  "character '" + f[0] + "' listed twice");
    }
  });
  return table;
}

std::vector<std::string> ParseBlacklist(std::string_view text) {
  std::vector<std::string> words;
  for (auto& line : SplitLines(text)) {
    if (!line.empty()) words.push_back(std::move(line));
  }
  return words;
}

std::string BlacklistReportCsv(const std::vector<BlacklistRow>& rows) {
  std::string out = "word,error_h1,error_h2,delta\n";
  for (const auto& r : rows) {
    out += CsvField(r.word) + "," + FormatDouble(r.error_h1) + "," +
           FormatDouble(r.error_h2) + "," + FormatDouble(r.delta) + "\n";
  }
  return out;
}

}  // namespace bcompat
