#include "tbsim/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace tbsim {

namespace {

using nlohmann::json;

json count_to_json(const CountWithSigma& c) {
  return json{{"value", c.value}, {"sigma", c.sigma}};
}

}  // namespace

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", value);
  return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::ios_base::failure("cannot write file: " + path);
  }
  out << content;
  if (!out) {
    throw std::ios_base::failure("write failed: " + path);
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::ios_base::failure("cannot open file: " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string histogram_csv(const CoincidenceHistogram& h) {
  std::ostringstream os;
  os << "delay_ps,counts\n";
  for (std::size_t i = 0; i < h.bins(); ++i) {
    if (h.counts[i] == 0) continue;  // sparse histograms stay readable
    os << format_double(h.bin_center(i)) << "," << h.counts[i] << "\n";
  }
  return os.str();
}

std::string track_csv(const PeakTrack& track) {
  std::ostringstream os;
  os << "chunk_start_s,peak_delay_ps,window_counts\n";
  for (const auto& e : track.entries) {
    os << format_double(e.chunk_start_s) << ","
       << format_double(e.peak_delay_ps) << "," << e.window_counts << "\n";
  }
  return os.str();
}

std::string fringe_csv(const FringeRunResult& result) {
  std::ostringstream os;
  os << "temperature_c,phase_rad,window_counts,fit_value\n";
  for (const auto& p : result.points) {
    os << format_double(p.temperature_c) << "," << format_double(p.phase_rad)
       << "," << format_double(p.window_counts) << ","
       << format_double(p.fit_value) << "\n";
  }
  return os.str();
}

std::string fringe_report_json(const FringeRunResult& result) {
  json j{{"fit",
          {{"r0", result.fit.r0},
           {"visibility", result.fit.v},
           {"visibility_unclamped", result.fit.v_unclamped},
           {"phi0_rad", result.fit.phi0},
           {"sigma_r0", result.fit.sigma_r0},
           {"sigma_visibility", result.fit.sigma_v},
           {"sigma_phi0", result.fit.sigma_phi0},
           {"residual_rms", result.fit.residual_rms}}},
         {"expected_visibility", result.expected_visibility},
         {"points", json::array()}};
  for (const auto& p : result.points) {
    j["points"].push_back(json{{"temperature_c", p.temperature_c},
                               {"phase_rad", p.phase_rad},
                               {"window_counts", p.window_counts},
                               {"fit_value", p.fit_value}});
  }
  return j.dump(2) + "\n";
}

std::string chsh_counts_csv(const ChshRunResult& result) {
  static const char* kRowNames[4] = {"ds,di", "ds,di'", "ds',di", "ds',di'"};
  std::ostringstream os;
  os << "settings,R(a;b),R(a;b+pi),R(a+pi;b),R(a+pi;b+pi),E,sigma_E\n";
  for (int row = 0; row < 4; ++row) {
    os << "\"" << kRowNames[row] << "\"";
    for (int col = 0; col < 4; ++col) {
      os << ","
         << format_double(
                result.result
                    .counts[static_cast<std::size_t>(row)]
                           [static_cast<std::size_t>(col)]
                    .value);
    }
    const auto& e = result.result.e_values[static_cast<std::size_t>(row)];
    os << "," << format_double(e.e) << "," << format_double(e.sigma) << "\n";
  }
  return os.str();
}

std::string chsh_report_json(const ChshRunResult& result) {
  json rows = json::array();
  for (int row = 0; row < 4; ++row) {
    json cells = json::array();
    for (int col = 0; col < 4; ++col) {
      cells.push_back(count_to_json(
          result.result.counts[static_cast<std::size_t>(row)]
                              [static_cast<std::size_t>(col)]));
    }
    const auto& e = result.result.e_values[static_cast<std::size_t>(row)];
    rows.push_back(json{{"counts", cells},
                        {"e", e.e},
                        {"sigma_e", e.sigma}});
  }
  json j{{"settings",
          {{"theta_s0", result.settings.theta_s0},
           {"theta_i0", result.settings.theta_i0},
           {"d_s", result.settings.d_s()},
           {"d_s_prime", result.settings.d_s_prime()},
           {"d_i", result.settings.d_i()},
           {"d_i_prime", result.settings.d_i_prime()}}},
         {"rows", rows},
         {"s", result.result.s},
         {"sigma_s", result.result.sigma_s},
         {"significance", result.result.significance},
         {"expected_visibility", result.expected_visibility},
         {"hours_per_setting", result.hours_per_setting}};
  return j.dump(2) + "\n";
}

std::string car_csv(const std::vector<CarPoint>& points) {
  std::ostringstream os;
  os << "mu,car,matched_counts,mean_accidentals_per_slot\n";
  for (const auto& p : points) {
    os << format_double(p.mu) << "," << format_double(p.car_value) << ","
       << format_double(p.matched_counts) << ","
       << format_double(p.mean_accidentals_per_slot) << "\n";
  }
  return os.str();
}

std::string plan_csv(const std::vector<PlanRow>& rows) {
  std::ostringstream os;
  os << "distance_km,fiber_loss_db,rate_per_hour,campaign_days\n";
  for (const auto& r : rows) {
    os << format_double(r.distance_km) << ","
       << format_double(r.fiber_loss_db) << ","
       << format_double(r.rate_per_hour) << ","
       << format_double(r.duration_days) << "\n";
  }
  return os.str();
}

std::string plan_report_json(const std::vector<PlanRow>& rows,
                             double max_distance_km,
                             const std::string& criterion) {
  json j{{"rows", json::array()},
         {"max_distance_km", max_distance_km},
         {"criterion", criterion}};
  for (const auto& r : rows) {
    j["rows"].push_back(json{{"distance_km", r.distance_km},
                             {"fiber_loss_db", r.fiber_loss_db},
                             {"rate_per_hour", r.rate_per_hour},
                             {"campaign_days", r.duration_days}});
  }
  return j.dump(2) + "\n";
}

void write_stream_file(const std::string& path, const EventStream& stream,
                       const std::string& scenario_hash, std::uint64_t seed) {
  std::ostringstream os;
  os << "# tbsim-stream v1 channel="
     << (stream.channel == Channel::signal ? "signal" : "idler")
     << " scenario=" << scenario_hash << " seed=" << seed
     << " events=" << stream.size() << "\n";
  for (const auto t : stream.timestamps_ps) {
    os << t << "\n";
  }
  write_text_file(path, os.str());
}

EventStream read_stream_file(const std::string& path,
                             std::string* scenario_hash_out,
                             std::uint64_t* seed_out) {
  std::ifstream in(path);
  if (!in) {
    throw std::ios_base::failure("cannot open stream file: " + path);
  }
  std::string header;
  std::getline(in, header);
  EventStream stream;
  if (header.rfind("# tbsim-stream", 0) != 0) {
    throw std::runtime_error("not a tbsim stream file: " + path);
  }
  if (header.find("channel=idler") != std::string::npos) {
    stream.channel = Channel::idler;
  }
  const auto scen_pos = header.find("scenario=");
  if (scenario_hash_out && scen_pos != std::string::npos) {
    const auto end = header.find(' ', scen_pos);
    *scenario_hash_out =
        header.substr(scen_pos + 9, end - (scen_pos + 9));
  }
  const auto seed_pos = header.find("seed=");
  if (seed_out && seed_pos != std::string::npos) {
    *seed_out = std::strtoull(header.c_str() + seed_pos + 5, nullptr, 10);
  }
  std::int64_t t;
  while (in >> t) {
    stream.timestamps_ps.push_back(t);
  }
  return stream;
}

std::string manifest_json(const RunManifest& m) {
  json j{{"command", m.command},
         {"args", m.args},
         {"scenario_hash", m.scenario_hash},
         {"seed", m.seed},
         {"started_utc", m.started_utc},
         {"finished_utc", m.finished_utc},
         {"outputs", m.outputs}};
  return j.dump(2) + "\n";
}

RunManifest manifest_from_json(const std::string& text) {
  const json j = json::parse(text);
  RunManifest m;
  m.command = j.value("command", std::string{});
  if (j.contains("args")) {
    m.args = j.at("args").get<std::vector<std::string>>();
  }
  m.scenario_hash = j.value("scenario_hash", std::string{});
  m.seed = j.value("seed", std::uint64_t{0});
  m.started_utc = j.value("started_utc", std::string{});
  m.finished_utc = j.value("finished_utc", std::string{});
  if (j.contains("outputs")) {
    m.outputs = j.at("outputs").get<std::vector<std::string>>();
  }
  return m;
}

}  // namespace tbsim
