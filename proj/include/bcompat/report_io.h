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

// File renderings of compatibility results.

#ifndef BCOMPAT_REPORT_IO_H_
#define BCOMPAT_REPORT_IO_H_

#include <string>
#include <vector>

#include "bcompat/compat.h"
#include "bcompat/experiments.h"

namespace bcompat {

// {"h1": model id, "h2": model id, "size": n, "btc": ..., "bec": ...,
//  "btc_denominator_zero": ..., "bec_denominator_zero": ..., "quadrants":
//  {...}, "acc_h1": ..., "acc_h2": ..., "accuracy_gain": ...,
//  "incompatible_ids": [...]}
std::string ReportJson(const UpdateComparison& cmp,
                       const CompatibilityReport& report);

// group,count,both_correct,both_wrong,h1c_h2w,h1w_h2c,acc_h1,acc_h2,gain,
// incompatible_count,incompatible_share
std::string GroupRowsCsv(const std::vector<GroupRow>& rows);

// id,true_label,h1_pred,h2_pred,h1_conf,h2_conf,groups for every h1-correct,
// h2-wrong point, sorted by id. Missing confidences are empty fields.
std::string IncompatibleCsv(const UpdateComparison& cmp);

// bin,lo,hi,count
std::string HistogramCsv(const ConfidenceHistogram& hist);

// Console summary "BTC=0.8571 BEC=0.6667 ΔAcc=+0.0000".
std::string SummaryLine(const CompatibilityReport& report);

// One trial of an experiment, with seeds, metrics and group tables.
std::string TrialJson(const TrialResult& trial);

}  // namespace bcompat

#endif  // BCOMPAT_REPORT_IO_H_
