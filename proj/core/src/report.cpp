#include <sstream>
#include <string>

#include <json.hpp>

#include "bytes.hpp"
#include "stratdepth/error.hpp"
#include "stratdepth/io.hpp"

namespace stratdepth {

using nlohmann::json;

std::string library_version() { return STRATDEPTH_VERSION; }

namespace {

json metrics_json(const MetricSet& m) {
  return json{{"abs_rel", m.abs_rel}, {"sq_rel", m.sq_rel},
              {"rmse", m.rmse},       {"rmse_log", m.rmse_log},
              {"delta1", m.delta1},   {"delta2", m.delta2},
              {"delta3", m.delta3},   {"n_pixels", m.n_pixels}};
}

MetricSet metrics_from(const json& j) {
  MetricSet m;
  m.abs_rel = j.at("abs_rel").get<double>();
  m.sq_rel = j.at("sq_rel").get<double>();
  m.rmse = j.at("rmse").get<double>();
  m.rmse_log = j.at("rmse_log").get<double>();
  m.delta1 = j.at("delta1").get<double>();
  m.delta2 = j.at("delta2").get<double>();
  m.delta3 = j.at("delta3").get<double>();
  m.n_pixels = j.at("n_pixels").get<std::size_t>();
  return m;
}

json config_value(const ConfigValue& v) {
  return std::visit([](const auto& x) { return json(x); }, v);
}

ConfigValue config_from(const json& j) {
  if (j.is_boolean()) return j.get<bool>();
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_number_float()) return j.get<double>();
  if (j.is_string()) return j.get<std::string>();
  throw Error(ErrorCode::kFormatError, "report: unsupported config value");
}

}  // namespace

std::string report_to_json(const Report& r) {
  json j;
  j["tool"] = {{"name", r.tool},
               {"version", r.version.empty() ? library_version() : r.version}};
  j["command"] = r.command;
  json config = json::object();
  for (const auto& [k, v] : r.config) config[k] = config_value(v);
  j["config"] = config;

  json frames = json::array();
  for (const auto& f : r.frames) {
    json fj{{"frame_id", f.frame_id}, {"metrics", metrics_json(f.metrics)}};
    if (f.feature) fj["feature"] = *f.feature;
    if (f.component) fj["component"] = *f.component;
    if (f.difficulty) fj["difficulty"] = *f.difficulty;
    frames.push_back(std::move(fj));
  }
  j["frames"] = frames;

  json skipped = json::array();
  for (const auto& s : r.skipped) {
    skipped.push_back({{"frame_id", s.frame_id}, {"reason", s.reason}});
  }
  j["skipped"] = skipped;
  j["evaluated"] = r.frames.size();

  if (r.global) j["global"] = metrics_json(*r.global);

  if (!r.clusters.empty()) {
    json clusters = json::array();
    for (const auto& c : r.clusters) {
      json cj{{"name", c.name}, {"count", c.count}};
      if (c.component) cj["component"] = *c.component;
      if (c.metrics) cj["metrics"] = metrics_json(*c.metrics);
      clusters.push_back(std::move(cj));
    }
    j["clusters"] = clusters;
  }
  if (r.gmm) j["gmm"] = json::parse(gmm_to_json(*r.gmm));
  return j.dump(2) + "\n";
}

Report report_from_json(std::string_view text) {
  Report r;
  try {
    const json j = json::parse(text.begin(), text.end());
    r.tool = j.at("tool").at("name").get<std::string>();
    r.version = j.at("tool").at("version").get<std::string>();
    r.command = j.at("command").get<std::string>();
    for (const auto& [k, v] : j.at("config").items()) {
      r.config[k] = config_from(v);
    }
    for (const auto& fj : j.at("frames")) {
      FrameRecord f;
      f.frame_id = fj.at("frame_id").get<std::string>();
      f.metrics = metrics_from(fj.at("metrics"));
      if (fj.contains("feature")) f.feature = fj["feature"].get<double>();
      if (fj.contains("component")) {
        f.component = fj["component"].get<std::size_t>();
      }
      if (fj.contains("difficulty")) {
        f.difficulty = fj["difficulty"].get<std::string>();
      }
      r.frames.push_back(std::move(f));
    }
    for (const auto& sj : j.at("skipped")) {
      r.skipped.push_back({sj.at("frame_id").get<std::string>(),
                           sj.at("reason").get<std::string>()});
    }
    if (j.contains("global")) r.global = metrics_from(j["global"]);
    if (j.contains("clusters")) {
      for (const auto& cj : j["clusters"]) {
        ClusterRecord c;
        c.name = cj.at("name").get<std::string>();
        c.count = cj.at("count").get<std::size_t>();
        if (cj.contains("component")) {
          c.component = cj["component"].get<std::size_t>();
        }
        if (cj.contains("metrics")) c.metrics = metrics_from(cj["metrics"]);
        r.clusters.push_back(std::move(c));
      }
    }
    if (j.contains("gmm")) r.gmm = gmm_from_json(j["gmm"].dump());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormatError, std::string("report: ") + e.what());
  }
  return r;
}

void write_report(const std::filesystem::path& path, const Report& report) {
  const std::string text = report_to_json(report);
  detail::write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(
                                         text.data()),
                                     text.size()));
}

Report read_report(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  return report_from_json(std::string_view(
      reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

std::string report_to_csv(const Report& report) {
  std::ostringstream out;
  out << "cluster,metric,value\n";
  auto rows = [&](const std::string& name, const std::optional<MetricSet>& m) {
    const auto names = metric_names();
    const auto values = m ? metric_values(*m) : std::array<double, kMetricColumns>{};
    for (std::size_t i = 0; i < kMetricColumns; ++i) {
      out << name << ',' << names[i] << ',';
      if (m) out << json(values[i]).dump();
      out << '\n';
    }
  };
  if (report.clusters.empty()) {
    rows("global", report.global);
  } else {
    for (const auto& c : report.clusters) rows(c.name, c.metrics);
  }
  return out.str();
}

void write_report_csv(const std::filesystem::path& path, const Report& report) {
  const std::string text = report_to_csv(report);
  detail::write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(
                                         text.data()),
                                     text.size()));
}

}  // namespace stratdepth
