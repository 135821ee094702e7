// SPDX-License-Identifier: Apache-2.0
#pragma once

// JSON realizations of the domain types. Byte strings that are valid UTF-8 are stored as
// plain JSON strings; anything else becomes {"base64": "..."} so no byte is ever lost.

#include <tcforge/model.hpp>

namespace tcforge
{

[[nodiscard]] auto bytes_to_json(Bytes const& bytes) -> Json;
[[nodiscard]] auto bytes_from_json(Json const& j) -> Bytes;

void to_json(Json& j, Language const& v);
void from_json(Json const& j, Language& v);
void to_json(Json& j, Solution const& v);
void from_json(Json const& j, Solution& v);
void to_json(Json& j, Provenance const& v);
void from_json(Json const& j, Provenance& v);
void to_json(Json& j, TestCase const& v);
void from_json(Json const& j, TestCase& v);
void to_json(Json& j, Problem const& v);
void from_json(Json const& j, Problem& v);
void to_json(Json& j, Verdict const& v);
void from_json(Json const& j, Verdict& v);
void to_json(Json& j, CaseStat const& v);
void from_json(Json const& j, CaseStat& v);
void to_json(Json& j, QualityMetrics const& v);
void from_json(Json const& j, QualityMetrics& v);
void to_json(Json& j, IterationState const& v);
void from_json(Json const& j, IterationState& v);
void to_json(Json& j, FalseNegative const& v);
void from_json(Json const& j, FalseNegative& v);
void to_json(Json& j, FalsePositive const& v);
void from_json(Json const& j, FalsePositive& v);
void to_json(Json& j, ErrorLog const& v);
void from_json(Json const& j, ErrorLog& v);
void to_json(Json& j, FeedbackReport const& v);
void from_json(Json const& j, FeedbackReport& v);

/// Removes timing fields (wall_time_ms, peak_memory_mb) recursively; used to compare traces across runs.
[[nodiscard]] auto strip_timing(Json j) -> Json;

} // namespace tcforge
