#pragma once

// JSON encoding of the domain types. Decoders are strict: missing required
// keys, wrong types and unknown keys all raise Error{MalformedFrame}; callers
// re-tag the code where a different one applies.

#include <json.hpp>

#include "anglesizer/core.hpp"

namespace anglesizer::codec {

using nlohmann::json;

json encode(const DeviceProfile& p);
/// With `require_all` false, keys absent from `j` keep the values in `base`.
DeviceProfile decode_profile(const json& j, bool require_all = true,
                             const DeviceProfile& base = {});

json encode(const EngineConfig& c);
/// Overlays the keys present in `j` onto `base`. Does not validate.
EngineConfig decode_config(const json& j, const EngineConfig& base = {});

json encode(const SensorFrame& f);
SensorFrame decode_frame(const json& j);

json encode(const Warning& w);
Warning decode_warning(const json& j);

json encode(const MeasurementResult& r);
MeasurementResult decode_measurement(const json& j);

json encode(const FeedbackEvent& e);
FeedbackEvent decode_feedback(const json& j);

json encode(const AssessmentRecord& r);
AssessmentRecord decode_record(const json& j);

GestureKind decode_gesture(const json& j);

}  // namespace anglesizer::codec
