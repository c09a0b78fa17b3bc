/*
 * Copyright 2026 The CausalNet Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include "commands.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>

#include "causalnet/checkpoint.hpp"
#include "causalnet/error.hpp"

namespace causalnet::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

fs::path prepare_out_dir(const RunConfig& cfg) {
  const fs::path dir = cfg.paths.out_dir.empty() ? fs::path(".") : fs::path(cfg.paths.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw_error(ErrorKind::Io, "cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

void write_json(const fs::path& path, const ordered_json& doc) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw_error(ErrorKind::Io, "cannot write " + path.string());
  out << doc.dump(2) << '\n';
  if (!out) throw_error(ErrorKind::Io, "failed writing " + path.string());
}

// summary.json in the run directory plus one compact line on stdout.
int finish(const fs::path& dir, const char* command, ordered_json summary, std::ostream& out, int code = kExitOk) {
  ordered_json doc;
  doc["command"] = command;
  for (auto& [k, v] : summary.items()) doc[k] = v;
  write_json(dir / "summary.json", doc);
  out << doc.dump() << std::endl;
  return code;
}

void record_config(const fs::path& dir, const RunConfig& cfg) { write_json(dir / "config.json", to_json(cfg)); }

// Explicit path, else `<out_dir>/<fallback>` when that file exists (or is required).
std::string resolve(const std::string& configured, const fs::path& dir, const char* fallback, bool required,
                    const char* key) {
  if (!configured.empty()) return configured;
  const fs::path candidate = dir / fallback;
  if (fs::exists(candidate)) return candidate.string();
  if (required) {
    throw_error(ErrorKind::Config, std::string("paths.") + key + " is not set and " + candidate.string() +
                                       " does not exist");
  }
  return {};
}

DelayMatrix load_delays(const RunConfig& cfg, const fs::path& dir) {
  const std::string values = resolve(cfg.paths.delays, dir, "delays.csv", true, "delays");
  const std::string mask = resolve(cfg.paths.mask, dir, "mask.csv", false, "mask");
  return read_delay_matrix(values, mask);
}

Eigen::MatrixXd load_geo(const RunConfig& cfg, const fs::path& dir, const DelayMatrix& delays) {
  const std::string coords_path = resolve(cfg.paths.coordinates, dir, "coordinates.csv", false, "coordinates");
  const auto n = static_cast<Eigen::Index>(delays.airport_count());
  if (coords_path.empty()) return Eigen::MatrixXd::Zero(n, n);
  const std::vector<Coordinate> coords = read_coordinates_csv(coords_path, delays.airports);
  return geo_graph(coords, cfg.data.geo_sigma_km, cfg.data.geo_cutoff_km).weights;
}

ModelConfig resolve_model(const ModelConfig& configured, std::size_t airports) {
  ModelConfig m = configured;
  if (m.airports == 0) m.airports = airports;
  if (m.airports != airports) {
    throw_error(ErrorKind::Config, "model.airports is " + std::to_string(m.airports) + " but the data has " +
                                       std::to_string(airports) + " airports");
  }
  m.validate();
  return m;
}

ordered_json metrics_json(const std::vector<HorizonMetrics>& metrics) {
  ordered_json arr = ordered_json::array();
  for (std::size_t h = 0; h < metrics.size(); ++h) {
    arr.push_back({{"horizon", h + 1}, {"mae", metrics[h].mae}, {"rmse", metrics[h].rmse}});
  }
  return arr;
}

void write_coordinates_csv(const fs::path& path, const GroundTruth& truth) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw_error(ErrorKind::Io, "cannot write " + path.string());
  out << "airport,lat,lon\n";
  for (std::size_t i = 0; i < truth.airports.size(); ++i) {
    out << truth.airports[i] << ',' << format_number(truth.coordinates[i].lat_deg) << ','
        << format_number(truth.coordinates[i].lon_deg) << '\n';
  }
  if (!out) throw_error(ErrorKind::Io, "failed writing " + path.string());
}

std::string anchor_file(std::size_t anchor) {
  std::string digits = std::to_string(anchor);
  if (digits.size() < 6) digits.insert(0, 6 - digits.size(), '0');
  return "anchor_" + digits + ".json";
}

std::string history_file(Variant v, std::uint64_t seed) {
  return std::string("history_") + variant_name(v) + "_" + std::to_string(seed) + ".csv";
}

}  // namespace

int cmd_defaults(std::ostream& out) {
  out << to_json(RunConfig{}).dump(2) << std::endl;
  return kExitOk;
}

int cmd_synth(const RunConfig& cfg, std::ostream& out) {
  const fs::path dir = prepare_out_dir(cfg);
  record_config(dir, cfg);
  const SynthDataset ds = generate(cfg.synth);
  write_delay_matrix(ds.delays, (dir / "delays.csv").string(), (dir / "mask.csv").string());
  write_ground_truth_json((dir / "ground_truth.json").string(), ds.truth);
  write_coordinates_csv(dir / "coordinates.csv", ds.truth);
  std::size_t edges = 0;
  for (Eigen::Index i = 0; i < ds.truth.weights.size(); ++i) edges += ds.truth.weights.data()[i] != 0.0 ? 1 : 0;
  return finish(dir, "synth",
                {{"airports", ds.delays.airport_count()},
                 {"hours", ds.delays.hours()},
                 {"planted_edges", edges},
                 {"spectral_radius", ds.truth.spectral_radius},
                 {"weight_scale", ds.truth.weight_scale}},
                out);
}

int cmd_ingest(const RunConfig& cfg, std::ostream& out) {
  if (cfg.paths.flights.empty()) throw_error(ErrorKind::Config, "paths.flights is required for ingest");
  const fs::path dir = prepare_out_dir(cfg);
  record_config(dir, cfg);
  const std::vector<FlightRecord> records = read_flight_records(cfg.paths.flights);
  if (records.empty()) throw_error(ErrorKind::Input, "no flight records in " + cfg.paths.flights);
  const std::vector<std::string> airports = airports_of(records);
  const auto hour_of = [](std::int64_t minute) { return minute >= 0 ? minute / 60 : -((-minute + 59) / 60); };
  HourSpan span{hour_of(records.front().scheduled_minute), hour_of(records.front().scheduled_minute) + 1};
  for (const auto& r : records) {
    span.begin = std::min(span.begin, hour_of(r.scheduled_minute));
    span.end = std::max(span.end, hour_of(r.scheduled_minute) + 1);
  }
  const BinResult binned = bin_delays(records, airports, span, cfg.data.cancellation_minutes);
  const ClipResult clipped = remove_outliers(binned.matrix, cfg.data.outlier_quantile);
  write_delay_matrix(clipped.matrix, (dir / "delays.csv").string(), (dir / "mask.csv").string());
  return finish(dir, "ingest",
                {{"records", records.size()},
                 {"rejected", binned.rejected},
                 {"airports", airports.size()},
                 {"hours", clipped.matrix.hours()},
                 {"start", format_hour(clipped.matrix.start_hour)},
                 {"clipped_fraction", clipped.clipped_fraction}},
                out);
}

int cmd_graphs(const RunConfig& cfg, std::ostream& out) {
  const fs::path dir = prepare_out_dir(cfg);
  record_config(dir, cfg);
  const DelayMatrix delays = load_delays(cfg, dir);
  const GraphSchedule schedule = GraphSchedule::build(delays.values, cfg.granger);
  const fs::path graph_dir = dir / "graphs";
  fs::create_directories(graph_dir);
  for (const auto& set : schedule.sets()) {
    write_graph_set_json((graph_dir / anchor_file(set.anchor)).string(), set, delays.airports);
  }
  ordered_json last_edges = ordered_json::object();
  if (!schedule.sets().empty()) {
    const CausalGraphSet& last = schedule.sets().back();
    for (std::size_t s = 0; s < kScaleCount; ++s) last_edges[scale_name(kScales[s])] = last.graphs[s].sum();
  }
  return finish(dir, "graphs",
                {{"graph_sets", schedule.sets().size()},
                 {"cadence_hours", schedule.cadence()},
                 {"edges_at_last_anchor", last_edges}},
                out);
}

int cmd_train(const RunConfig& cfg, std::ostream& out) {
  const fs::path dir = prepare_out_dir(cfg);
  record_config(dir, cfg);
  const DelayMatrix delays = load_delays(cfg, dir);
  const ModelConfig model = resolve_model(cfg.model, delays.airport_count());
  const PreparedData data =
      prepare_data(delays, load_geo(cfg, dir, delays), cfg.granger, model.input_steps, model.horizon, cfg.data.split);
  const RunResult run = run_experiment(model, data, cfg.train);
  const ForecastResult baseline = persistence_baseline(data, data.split.test.anchors, model.horizon);

  const std::string checkpoint = cfg.paths.checkpoint.empty() ? (dir / "checkpoint.bin").string() : cfg.paths.checkpoint;
  save_checkpoint(checkpoint, model, run.training.params);
  write_history_csv((dir / "history.csv").string(), run.training.history);
  const std::vector<MetricsRow> rows{metrics_row(run), {"persistence", cfg.train.seed, baseline.metrics}};
  write_metrics_csv((dir / "metrics.csv").string(), rows);
  return finish(dir, "train",
                {{"variant", variant_name(model.variant)},
                 {"seed", cfg.train.seed},
                 {"epochs", run.training.history.size()},
                 {"best_epoch", run.training.best_epoch},
                 {"best_val_mae", run.training.best_val_mae},
                 {"test", metrics_json(run.test.metrics)},
                 {"persistence", metrics_json(baseline.metrics)}},
                out);
}

int cmd_eval(const RunConfig& cfg, std::ostream& out) {
  const fs::path dir = prepare_out_dir(cfg);
  record_config(dir, cfg);
  if (!cfg.paths.predictions.empty() || !cfg.paths.truth.empty()) {
    if (cfg.paths.predictions.empty() || cfg.paths.truth.empty()) {
      throw_error(ErrorKind::Config, "paths.predictions and paths.truth must be set together");
    }
    const DelayMatrix preds = read_delay_matrix(cfg.paths.predictions);
    const DelayMatrix truth = read_delay_matrix(cfg.paths.truth, cfg.paths.mask);
    if (preds.airports != truth.airports || preds.hours() != truth.hours() || preds.start_hour != truth.start_hour) {
      throw_error(ErrorKind::Input, "predictions and truth cover different airports or hours");
    }
    const HorizonMetrics m = evaluate(preds.values, truth.values, truth.mask);
    const std::vector<MetricsRow> rows{{"predictions", cfg.train.seed, {m}}};
    write_metrics_csv((dir / "metrics.csv").string(), rows);
    return finish(dir, "eval", {{"mode", "files"}, {"mae", m.mae}, {"rmse", m.rmse}}, out);
  }

  const std::string checkpoint = resolve(cfg.paths.checkpoint, dir, "checkpoint.bin", true, "checkpoint");
  const Checkpoint ckpt = load_checkpoint(checkpoint);
  const DelayMatrix delays = load_delays(cfg, dir);
  const ModelConfig model = resolve_model(ckpt.config, delays.airport_count());
  const PreparedData data =
      prepare_data(delays, load_geo(cfg, dir, delays), cfg.granger, model.input_steps, model.horizon, cfg.data.split);
  const ForecastResult test = predict(CausalNet(model), data, ckpt.params, data.split.test.anchors);
  const ForecastResult baseline = persistence_baseline(data, data.split.test.anchors, model.horizon);
  const std::vector<MetricsRow> rows{{variant_name(model.variant), cfg.train.seed, test.metrics},
                                     {"persistence", cfg.train.seed, baseline.metrics}};
  write_metrics_csv((dir / "metrics.csv").string(), rows);
  return finish(dir, "eval",
                {{"mode", "checkpoint"},
                 {"variant", variant_name(model.variant)},
                 {"samples", test.anchors.size()},
                 {"test", metrics_json(test.metrics)},
                 {"persistence", metrics_json(baseline.metrics)}},
                out);
}

int cmd_ablate(const RunConfig& cfg, std::ostream& out) {
  const fs::path dir = prepare_out_dir(cfg);
  record_config(dir, cfg);
  const DelayMatrix delays = load_delays(cfg, dir);
  const ModelConfig model = resolve_model(cfg.model, delays.airport_count());
  const PreparedData data =
      prepare_data(delays, load_geo(cfg, dir, delays), cfg.granger, model.input_steps, model.horizon, cfg.data.split);
  const ForecastResult baseline = persistence_baseline(data, data.split.test.anchors, model.horizon);

  std::vector<MetricsRow> rows;
  std::map<std::string, std::vector<std::vector<double>>> maes;  // label -> horizon -> per-seed MAE
  const auto collect = [&](const MetricsRow& row) {
    auto& per_h = maes[row.variant];
    per_h.resize(row.metrics.size());
    for (std::size_t h = 0; h < row.metrics.size(); ++h) per_h[h].push_back(row.metrics[h].mae);
    rows.push_back(row);
  };
  for (std::size_t rep = 0; rep < cfg.repetitions; ++rep) {
    TrainConfig tc = cfg.train;
    tc.seed = cfg.train.seed + rep;
    for (Variant v : cfg.variants) {
      const RunResult run = ablate(v, model, data, tc);
      write_history_csv((dir / history_file(v, tc.seed)).string(), run.training.history);
      collect(metrics_row(run));
    }
    collect({"persistence", tc.seed, baseline.metrics});
  }
  write_metrics_csv((dir / "metrics.csv").string(), rows);

  ordered_json medians = ordered_json::object();
  std::vector<std::string> labels;
  for (Variant v : cfg.variants) labels.emplace_back(variant_name(v));
  labels.emplace_back("persistence");
  for (const auto& label : labels) {
    ordered_json per_h = ordered_json::array();
    for (const auto& values : maes[label]) per_h.push_back(median(values));
    medians[label] = per_h;
  }
  return finish(dir, "ablate",
                {{"repetitions", cfg.repetitions}, {"first_seed", cfg.train.seed}, {"median_mae", medians}}, out);
}

int cmd_gradcheck(const RunConfig& cfg, const GradCheckOptions& opt, std::ostream& out) {
  const fs::path dir = prepare_out_dir(cfg);
  record_config(dir, cfg);
  ModelConfig model = cfg.model;
  model.airports = opt.airports;
  model.input_steps = opt.input_steps;
  model.horizon = opt.horizon;
  model.hidden = opt.hidden;
  const ModelGradCheck result = model_gradient_check(model, opt.batch, opt.seed, opt.eps);
  const bool passed = result.report.max_relative_error < opt.tolerance;
  return finish(dir, "gradcheck",
                {{"variant", variant_name(model.variant)},
                 {"airports", model.airports},
                 {"input_steps", model.input_steps},
                 {"horizon", model.horizon},
                 {"hidden", model.hidden},
                 {"parameters", result.parameters},
                 {"checked", result.report.checked},
                 {"excluded", result.report.excluded},
                 {"max_relative_error", result.report.max_relative_error},
                 {"tolerance", opt.tolerance},
                 {"passed", passed}},
                out, passed ? kExitOk : kExitGradCheck);
}

int cmd_analyze(const RunConfig& cfg, std::ostream& out) {
  const fs::path dir = prepare_out_dir(cfg);
  record_config(dir, cfg);
  const std::string checkpoint = resolve(cfg.paths.checkpoint, dir, "checkpoint.bin", true, "checkpoint");
  const Checkpoint ckpt = load_checkpoint(checkpoint);
  const DelayMatrix delays = load_delays(cfg, dir);
  const ModelConfig model_cfg = resolve_model(ckpt.config, delays.airport_count());
  const CausalNet model(model_cfg);
  const PreparedData data =
      prepare_data(delays, load_geo(cfg, dir, delays), cfg.granger, model_cfg.input_steps, model_cfg.horizon,
                   cfg.data.split);

  const CorrectionSamples samples = collect_correction(model, data, ckpt.params, data.split.test.anchors);
  const auto distances = analyze_correction(samples.raw, samples.corrected);
  ordered_json dist = ordered_json::object();
  for (std::size_t s = 0; s < kScaleCount; ++s) dist[scale_name(kScales[s])] = distances[s];

  const std::vector<double> scores = report_adaptive_weights(model, ckpt.params);
  std::vector<std::size_t> order(scores.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<std::size_t> rank(scores.size());
  for (std::size_t r = 0; r < order.size(); ++r) rank[order[r]] = r + 1;
  ordered_json weights = ordered_json::array();
  for (std::size_t i = 0; i < scores.size(); ++i) {
    weights.push_back({{"airport", data.airports[i]}, {"score", scores[i]}, {"rank", rank[i]}});
  }

  ordered_json analysis;
  analysis["samples"] = samples.raw.size();
  analysis["correction_distance"] = dist;
  analysis["adaptive_weights"] = weights;
  const std::string truth_path = resolve(cfg.paths.ground_truth, dir, "ground_truth.json", false, "ground_truth");
  ordered_json summary{{"samples", samples.raw.size()}, {"correction_distance", dist}};
  if (!truth_path.empty()) {
    const GroundTruth truth = read_ground_truth_json(truth_path);
    if (truth.airports != data.airports) throw_error(ErrorKind::Input, "ground truth airports differ from the data");
    const double rho = spearman(scores, truth.susceptibility);
    analysis["susceptibility_spearman"] = rho;
    summary["susceptibility_spearman"] = rho;
  }
  write_json(dir / "analysis.json", analysis);
  return finish(dir, "analyze", summary, out);
}

}  // namespace causalnet::cli
