#pragma once

// Plot-ready CSV and JSON output. Numbers are written with 9 significant
// digits; files are written to a temporary sibling and renamed into place.

#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "charger/analysis.hpp"
#include "charger/sim.hpp"

namespace charger {

inline constexpr const char* kTraceCsvHeader = "t,i_L,v_C,i_B,d,s_f,v_OB,i_B_ref";

/// %.9g, with "nan", "inf" and "-inf" for non-finite values.
std::string format_number(double v);

/// v rounded to 9 significant digits (what format_number would print).
double round9(double v);

/// Writes through `fill` into path + ".tmp", then renames over `path`.
/// The destination is untouched if `fill` throws.
void write_file_atomic(const std::string& path, const std::function<void(std::ostream&)>& fill);

void write_trace_csv(std::ostream& os, const Trace& trace, std::size_t stride = 1);
void write_bode_csv(std::ostream& os, const FrequencyResponse& fr);
void write_root_locus_csv(std::ostream& os, const std::vector<LocusPoint>& locus);
void write_step_csv(std::ostream& os, const StepResponse& r);
void write_surface_csv(std::ostream& os, const SurfaceGrid& g);

/// "key=value" lines for an operating point.
std::string operating_point_listing(const OperatingPoint& op);
std::string operating_point_json(const OperatingPoint& op);

/// Metrics document for a simulated scenario.
std::string metrics_json(const std::vector<SegmentMetrics>& segments, const Trace& trace);

}  // namespace charger
