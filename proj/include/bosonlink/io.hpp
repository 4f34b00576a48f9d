// io.hpp — serialization: binary state container, JSON records for states and
// transforms, and the fixed-format float used by every CSV column.

#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "bosonlink/analytic.hpp"
#include "bosonlink/fock.hpp"
#include "bosonlink/pulse.hpp"

namespace bosonlink {

/// Scientific notation, 12 significant digits; byte-stable across runs.
std::string format_float(double value);

/// Binary container: magic "BLNK", version, per-mode dims, then branches as
/// (weight, interleaved re/im amplitudes), all little-endian 64-bit floats
/// (dims as little-endian uint32).
void save_state(const State& state, std::ostream& os);
State load_state(std::istream& is);
void save_state_file(const State& state, const std::string& path);
State load_state_file(const std::string& path);

nlohmann::json state_to_json(const State& state);
State state_from_json(const nlohmann::json& j);

/// Complex matrices as nested arrays of [re, im] pairs; frame is recorded.
nlohmann::json transform_to_json(const BogoliubovTransform& t);
BogoliubovTransform transform_from_json(const nlohmann::json& j);

nlohmann::json pulse_to_json(const PulseParams& p);
nlohmann::json tradeoff_to_json(const TradeoffResult& r);

std::string pulse_kind_name(PulseKind kind);

}  // namespace bosonlink
