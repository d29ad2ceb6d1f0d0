#include "charger/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "charger/errors.hpp"

namespace charger {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

double round9(double v) {
  if (!std::isfinite(v)) return v;
  return std::stod(format_number(v));
}

void write_file_atomic(const std::string& path, const std::function<void(std::ostream&)>& fill) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot open '" + tmp + "' for writing");
    try {
      fill(out);
    } catch (...) {
      out.close();
      std::filesystem::remove(tmp);
      throw;
    }
    out.flush();
    if (!out) {
      out.close();
      std::filesystem::remove(tmp);
      throw ValidationError("write to '" + tmp + "' failed");
    }
  }
  std::filesystem::rename(tmp, path);
}

void write_trace_csv(std::ostream& os, const Trace& trace, std::size_t stride) {
  if (stride == 0) stride = 1;
  os << kTraceCsvHeader << '\n';
  for (std::size_t k = 0; k < trace.samples.size(); k += stride) {
    const auto& s = trace.samples[k];
    os << format_number(s.t) << ',' << format_number(s.i_l) << ',' << format_number(s.v_c) << ','
       << format_number(s.i_b) << ',' << format_number(s.d) << ',' << format_number(s.s_f) << ','
       << format_number(s.v_ob) << ',' << format_number(s.i_b_ref) << '\n';
  }
}

void write_bode_csv(std::ostream& os, const FrequencyResponse& fr) {
  os << "f_hz,mag_db,phase_deg\n";
  for (const auto& p : fr.points) {
    os << format_number(p.f_hz) << ',' << format_number(p.mag_db) << ','
       << format_number(p.phase_deg) << '\n';
  }
}

void write_root_locus_csv(std::ostream& os, const std::vector<LocusPoint>& locus) {
  os << "k,re,im\n";
  for (const auto& pt : locus) {
    for (const auto& p : pt.poles) {
      os << format_number(pt.gain) << ',' << format_number(p.real()) << ','
         << format_number(p.imag()) << '\n';
    }
  }
}

void write_step_csv(std::ostream& os, const StepResponse& r) {
  os << "t,y\n";
  for (const auto& s : r.samples) os << format_number(s.t) << ',' << format_number(s.y) << '\n';
}

void write_surface_csv(std::ostream& os, const SurfaceGrid& g) {
  os << "x,y,value\n";
  for (std::size_t i = 0; i < g.x.samples.size(); ++i) {
    for (std::size_t j = 0; j < g.y.samples.size(); ++j) {
      os << format_number(g.x.samples[i]) << ',' << format_number(g.y.samples[j]) << ','
         << format_number(g.value(i, j)) << '\n';
    }
  }
}

std::string operating_point_listing(const OperatingPoint& op) {
  std::ostringstream os;
  os << "duty=" << format_number(op.duty) << '\n'
     << "v_d=" << format_number(op.v_d) << '\n'
     << "v_ob=" << format_number(op.v_ob) << '\n'
     << "i_l=" << format_number(op.i_l) << '\n'
     << "v_c=" << format_number(op.v_c) << '\n'
     << "i_b=" << format_number(op.i_b) << '\n';
  return os.str();
}

namespace {

using nlohmann::ordered_json;

ordered_json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return round9(v);
}

ordered_json window_json(const Window& w) { return {number(w.t_start), number(w.t_end)}; }

}  // namespace

std::string operating_point_json(const OperatingPoint& op) {
  ordered_json j;
  j["duty"] = number(op.duty);
  j["v_d"] = number(op.v_d);
  j["v_ob"] = number(op.v_ob);
  j["i_l"] = number(op.i_l);
  j["v_c"] = number(op.v_c);
  j["i_b"] = number(op.i_b);
  return j.dump();
}

std::string metrics_json(const std::vector<SegmentMetrics>& segments, const Trace& trace) {
  ordered_json root;
  root["mode"] = to_string(trace.mode);
  root["h"] = number(trace.h);
  root["t_s"] = number(trace.t_s);
  root["samples"] = trace.samples.size();
  ordered_json segs = ordered_json::array();
  for (const auto& m : segments) {
    ordered_json s;
    s["segment"] = window_json(m.segment);
    s["steady_window"] = window_json(m.means.window);
    s["mean"] = {{"i_l", number(m.means.i_l)}, {"v_c", number(m.means.v_c)},
                 {"i_b", number(m.means.i_b)}, {"d", number(m.means.d)},
                 {"s_f", number(m.means.s_f)}, {"v_l", number(m.means.v_l)},
                 {"i_c", number(m.means.i_c)}, {"i_b_ref", number(m.means.i_b_ref)},
                 {"v_ob", number(m.means.v_ob)}};
    const double err = m.means.i_b_ref != 0.0
                           ? 100.0 * (m.means.i_b - m.means.i_b_ref) / m.means.i_b_ref
                           : m.means.i_b - m.means.i_b_ref;
    s["i_b_error_percent"] = number(err);
    if (m.ripple_valid) {
      s["ripple"] = {{"i_l_pp", number(m.ripple.i_l_pp)},
                     {"i_l_percent", number(m.ripple.i_l_percent)},
                     {"v_c_pp", number(m.ripple.v_c_pp)},
                     {"v_c_percent", number(m.ripple.v_c_percent)}};
    } else {
      s["ripple"] = nullptr;
    }
    s["settling"] = {{"event_t", number(m.settling.event_t)},
                     {"settled", m.settling.settled},
                     {"settling_time", number(m.settling.settling_time)},
                     {"final_i_b", number(m.settling.final_value)},
                     {"peak_i_b", number(m.settling.peak_value)},
                     {"peak_t", number(m.settling.peak_time)}};
    segs.push_back(s);
  }
  root["segments"] = segs;
  return root.dump(2) + "\n";
}

}  // namespace charger
