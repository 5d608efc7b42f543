#pragma once

#include <string>

#include "ftk/calibrate.hpp"
#include "ftk/curve.hpp"
#include "ftk/market_data.hpp"

namespace ftk {

inline constexpr int kModelSchemaVersion = 1;

/// Everything `calibrate` produces that later commands need: both model
/// variants, their fit reports, and the quotes they were fitted to.
struct PersistedModel {
    int schema_version = kModelSchemaVersion;
    MarketSnapshot snapshot;
    CurveModel penalized;  // gamma from config (0 when seasonality is off)
    CurveModel plain;      // gamma = 0
    FitReport report;
    FitReport plain_report;
    double benchmark_nugget = 0.0;  // relative to sigma^2
};

std::string serialize_model(const PersistedModel& model);
PersistedModel deserialize_model(const std::string& text);

void save_model(const PersistedModel& model, const std::string& path);
/// Throws IoError if unreadable, ParseError on malformed or unsupported documents.
PersistedModel load_model(const std::string& path);

}  // namespace ftk
