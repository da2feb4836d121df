// synckit: synchronization analysis for multichannel sensor time series.
// Subcommands: simulate | detect | scan | compare | report.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>
#include <json.hpp>

#include "synckit/ingest.hpp"
#include "synckit/pipeline.hpp"
#include "synckit/report_io.hpp"
#include "synckit/simulator.hpp"

namespace fs = std::filesystem;
using namespace synckit;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitInput = 2;
constexpr int kExitConfig = 3;

// Tracks files written by one command so a failure leaves no partial output.
class OutputTracker {
public:
    std::string at(const fs::path& dir, const char* name) {
        fs::path p = dir / name;
        written_.push_back(p);
        return p.string();
    }
    void commit() { written_.clear(); }
    ~OutputTracker() {
        for (const auto& p : written_) {
            std::error_code ec;
            fs::remove(p, ec);
        }
    }

private:
    std::vector<fs::path> written_;
};

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw input_error("cannot create output directory '" + dir.string() + "'");
}

// Wall-clock and provenance live here, outside the deterministic artifacts.
void write_run_meta(const fs::path& dir, const std::string& command,
                    const std::vector<std::string>& inputs) {
    nlohmann::ordered_json meta;
    meta["command"] = command;
    meta["inputs"] = inputs;
    auto now = std::chrono::system_clock::now();
    meta["wall_time_unix"] =
        std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count();
    std::ofstream f(dir / "run_meta.json");
    f << meta.dump(2) << '\n';
}

struct DetectCliOptions {
    std::string input;
    std::vector<std::string> logs;
    std::string schema;
    std::string config_file;
    std::string out_dir = "run";
    double align_tolerance = 1.0;
    double align_period = 0.0;
    bool interpolate = false;
    bool no_filter = false;
    bool no_self_osc = false;
    bool multiway = false;
    bool dump_coeffs = false;
    bool dump_pairs = false;
    DetectConfig cfg;
};

// The run config file overrides command-line flags. key=value lines with the
// long flag names as keys.
void apply_config_file(DetectCliOptions& o) {
    std::ifstream f(o.config_file);
    if (!f) throw input_error("cannot open config file '" + o.config_file + "'");
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(f, line)) {
        ++line_no;
        auto strip = [](std::string s) {
            while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.erase(s.begin());
            while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
                s.pop_back();
            return s;
        };
        std::string t = strip(line);
        if (t.empty() || t[0] == '#') continue;
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw config_error("config line " + std::to_string(line_no) + ": expected key=value");
        std::string key = strip(t.substr(0, eq));
        std::string value = strip(t.substr(eq + 1));
        double num = 0;
        bool numeric = parse_double(value, num);
        auto want_num = [&]() {
            if (!numeric)
                throw config_error("config line " + std::to_string(line_no) +
                                   ": bad numeric value for '" + key + "'");
            return num;
        };
        if (key == "order") o.cfg.detrend_order = static_cast<int>(want_num());
        else if (key == "frame") o.cfg.frame_len = static_cast<std::size_t>(want_num());
        else if (key == "lowpass") o.cfg.lowpass.cutoff = want_num();
        else if (key == "filter-order") o.cfg.lowpass.order = static_cast<int>(want_num());
        else if (key == "no-filter") o.no_filter = want_num() != 0;
        else if (key == "window") o.cfg.t_synch = static_cast<int>(want_num());
        else if (key == "z") o.cfg.z = want_num();
        else if (key == "l-thresh") o.cfg.l_thresh = want_num();
        else if (key == "min-gap") o.cfg.min_gap = static_cast<int>(want_num());
        else if (key == "skip-hours") o.cfg.skip_hours = want_num();
        else if (key == "no-self-osc-reject") o.no_self_osc = want_num() != 0;
        else if (key == "threads") o.cfg.threads = static_cast<int>(want_num());
        else if (key == "multiway") o.multiway = want_num() != 0;
        else throw config_error("config line " + std::to_string(line_no) + ": unknown key '" +
                                key + "'");
    }
}

Session load_input_session(const DetectCliOptions& o, std::vector<std::string>& inputs) {
    if (!o.input.empty() && !o.logs.empty())
        throw config_error("give either --input or --logs, not both");
    if (o.input.empty() && o.logs.empty())
        throw config_error("no input: use --input SESSION or --logs FILES");

    if (!o.input.empty()) {
        inputs.push_back(o.input);
        if (!fs::exists(o.input) || fs::is_directory(o.input)) {
            // allow a directory holding exactly one session.csv
            fs::path candidate = fs::path(o.input) / "session.csv";
            if (fs::exists(candidate)) {
                inputs.back() = candidate.string();
                return load_session_csv(candidate.string());
            }
            throw input_error("input '" + o.input + "' is not a readable session file");
        }
        return load_session_csv(o.input);
    }

    std::optional<ColumnSchema> schema;
    if (!o.schema.empty()) schema = ColumnSchema::load_file(o.schema);
    std::vector<ParsedStream> streams;
    for (const auto& path : o.logs) {
        inputs.push_back(path);
        streams.push_back(parse_log_file(path, schema));
    }
    AlignOptions ao;
    ao.tolerance = o.align_tolerance;
    ao.sample_period = o.align_period;
    ao.interpolate = o.interpolate;
    return align(streams, ao).session;
}

void write_pair_dump(const DetectResult& result, const Session& session, const std::string& path) {
    // per-pair correlation dump for plotting, recomputed per frame on the
    // same detrend/filter settings the run used
    const DetectConfig& cfg = result.config;
    Session work = cfg.skip_hours > 0 ? reject_initial(session, cfg.skip_hours) : session;
    std::ofstream f(path);
    f << "index,pair,r\n";
    auto imp = work.spans_of_kind(ChannelKind::impedance);
    std::size_t frame_len = cfg.frame_len ? cfg.frame_len : work.n_samples;
    for (std::size_t begin = 0; begin + frame_len <= work.n_samples; begin += frame_len) {
        std::vector<std::vector<double>> residuals;
        for (auto& s : imp) {
            auto slice = s.subspan(begin, frame_len);
            FitResult fit = polyfit_lm(slice, cfg.detrend_order, cfg.lm);
            ResidualSeries res = residual(slice, fit.model);
            residuals.push_back(cfg.filter_enabled ? LowpassFilter(cfg.lowpass).apply(res.values)
                                                   : std::move(res.values));
        }
        std::vector<std::span<const double>> spans(residuals.begin(), residuals.end());
        PairCorrelations pc = rolling_pairs(spans, cfg.t_synch, cfg.threads);
        for (std::size_t q = 0; q < pc.pairs.size(); ++q)
            for (std::size_t k = 0; k < pc.n_positions; ++k)
                f << begin + pc.sample_index(k) << ',' << pc.pairs[q].i << '-' << pc.pairs[q].j
                  << ',' << format_double(pc.r[q][k]) << '\n';
    }
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir,
                 std::int64_t seed_override) {
    sim::SimConfig cfg = config_path.empty() ? sim::SimConfig{} : sim::load_sim_config_file(config_path);
    if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);
    sim::SimResult result = sim::simulate(cfg);

    fs::path dir(out_dir);
    ensure_dir(dir);
    OutputTracker outputs;
    save_session_csv(result.session, outputs.at(dir, "session.csv"));

    nlohmann::ordered_json truth;
    truth["n_cells"] = cfg.n_cells;
    truth["duration"] = cfg.duration;
    truth["sample_period"] = cfg.sample_period;
    truth["seed"] = cfg.seed;
    truth["coupling"] = cfg.coupling;
    auto event_json = [](const sim::GroundTruth::EventTruth& e) {
        nlohmann::ordered_json je;
        je["start"] = e.start;
        je["end"] = e.end;
        je["cells"] = e.cells;
        je["phase_sign"] = e.phase_sign;
        return je;
    };
    truth["events"] = nlohmann::ordered_json::array();
    for (const auto& e : result.truth.events) truth["events"].push_back(event_json(e));
    truth["self_oscillations"] = nlohmann::ordered_json::array();
    for (const auto& e : result.truth.self_oscillations)
        truth["self_oscillations"].push_back(event_json(e));
    {
        std::ofstream f(outputs.at(dir, "ground_truth.json"));
        f << truth.dump(2) << '\n';
    }
    write_run_meta(dir, "simulate", {config_path});
    outputs.commit();
    std::cout << "simulated " << cfg.n_cells << " cells x " << cfg.duration << " samples -> "
              << dir.string() << "\n";
    return kExitOk;
}

int cmd_detect(DetectCliOptions& o) {
    if (!o.config_file.empty()) apply_config_file(o);
    o.cfg.filter_enabled = !o.no_filter;
    o.cfg.self_osc_rejection = !o.no_self_osc;
    o.cfg.compute_multiway = o.multiway;

    std::vector<std::string> inputs;
    Session session = load_input_session(o, inputs);
    DetectResult result = run_detect(session, o.cfg);

    fs::path dir(o.out_dir);
    ensure_dir(dir);
    OutputTracker outputs;
    write_events_json(result, outputs.at(dir, "events.json"));
    write_rates_csv(result, outputs.at(dir, "rates.csv"));
    write_metrics_csv(result, outputs.at(dir, "metrics.csv"));
    write_subset_csv(result, outputs.at(dir, "subset.csv"));
    if (result.has_groups) write_groups_csv(result, outputs.at(dir, "groups.csv"));
    write_report_json(result, outputs.at(dir, "report.json"), o.dump_coeffs);
    if (o.dump_pairs) write_pair_dump(result, session, outputs.at(dir, "pairs.csv"));
    write_run_meta(dir, "detect", inputs);
    outputs.commit();

    std::cout << result.events.size() << " event(s) over " << result.n_samples << " samples\n"
              << rates_table_text(result);
    return kExitOk;
}

int cmd_scan(const std::string& input, const std::string& out_dir, int window_min, int window_max,
             int step, DetectConfig cfg) {
    DetectCliOptions o;
    o.input = input;
    std::vector<std::string> inputs;
    Session session = load_input_session(o, inputs);
    Session work = cfg.skip_hours > 0 ? reject_initial(session, cfg.skip_hours) : session;

    // residuals on the scan frame: whole session detrend + filter
    auto imp_idx = work.channels_of_kind(ChannelKind::impedance);
    if (imp_idx.size() < 2) throw input_error("scan needs at least 2 impedance channels");
    std::vector<std::vector<double>> residuals;
    for (auto idx : imp_idx) {
        FitResult fit = polyfit_lm(work.channels[idx].values, cfg.detrend_order, cfg.lm);
        ResidualSeries res = residual(work.channels[idx].values, fit.model);
        residuals.push_back(cfg.filter_enabled ? LowpassFilter(cfg.lowpass).apply(res.values)
                                               : std::move(res.values));
    }
    std::vector<std::span<const double>> spans(residuals.begin(), residuals.end());
    WindowScan scan = scan_window(spans, window_min, window_max, step,
                                  cfg.threads > 0 ? cfg.threads : default_thread_count());

    fs::path dir(out_dir);
    ensure_dir(dir);
    OutputTracker outputs;
    {
        std::ofstream f(outputs.at(dir, "scan.csv"));
        f << "window,peak_r_mean\n";
        for (const auto& [w, peak] : scan.curve)
            f << w << ',' << format_double(peak) << '\n';
    }
    {
        nlohmann::ordered_json doc;
        doc["best_t_synch"] = scan.best_t_synch;
        doc["best_peak_r_mean"] = scan.best_peak_r_mean;
        std::ofstream f(outputs.at(dir, "scan.json"));
        f << doc.dump(2) << '\n';
    }
    write_run_meta(dir, "scan", inputs);
    outputs.commit();
    std::cout << "best window " << scan.best_t_synch << " with peak r_mean "
              << format_double(scan.best_peak_r_mean) << "\n";
    return kExitOk;
}

int cmd_compare(const std::string& run_a, const std::string& run_b, const std::string& out_dir) {
    CompareReport rep = compare_runs(run_a, run_b);
    std::cout << compare_table_text(rep);
    if (!out_dir.empty()) {
        fs::path dir(out_dir);
        ensure_dir(dir);
        OutputTracker outputs;
        write_compare_csv(rep, outputs.at(dir, "compare.csv"));
        write_run_meta(dir, "compare", {run_a, run_b});
        outputs.commit();
    }
    return kExitOk;
}

int cmd_report(const std::string& run_dir) {
    auto rows = load_rates_csv(run_dir + "/rates.csv");
    std::size_t events = count_events_json(run_dir + "/events.json");
    std::cout << "run " << run_dir << ": " << events << " event(s)\n";
    std::cout << "criterion         mode      n_smp     rate/s\n";
    for (const auto& row : rows) {
        std::cout << "  " << row.criterion;
        for (std::size_t i = row.criterion.size(); i < 16; ++i) std::cout << ' ';
        std::cout << row.mode;
        for (std::size_t i = row.mode.size(); i < 10; ++i) std::cout << ' ';
        std::cout << row.n_smp << "\t" << format_double(row.rate) << '\n';
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"synchronization analysis for multichannel sensor time series"};
    app.require_subcommand(1);

    // simulate
    auto* sim_cmd = app.add_subcommand("simulate", "generate a synthetic session with ground truth");
    std::string sim_config, sim_out = "sim";
    std::int64_t sim_seed = -1;
    sim_cmd->add_option("--config", sim_config, "scenario file (key=value)");
    sim_cmd->add_option("--out", sim_out, "output directory");
    sim_cmd->add_option("--seed", sim_seed, "override the scenario seed");

    // detect
    auto* det_cmd = app.add_subcommand("detect", "run the detection pipeline");
    DetectCliOptions det;
    det.cfg.skip_hours = 24.0;
    det_cmd->add_option("--input", det.input, "session file (or directory with session.csv)");
    det_cmd->add_option("--logs", det.logs, "raw device log files to align");
    det_cmd->add_option("--schema", det.schema, "column schema for --logs");
    det_cmd->add_option("--config", det.config_file, "run config file; overrides flags");
    det_cmd->add_option("--out", det.out_dir, "output directory");
    det_cmd->add_option("--order", det.cfg.detrend_order, "detrend polynomial order");
    det_cmd->add_option("--frame", det.cfg.frame_len, "frame length in samples, 0 = whole session");
    det_cmd->add_option("--lowpass", det.cfg.lowpass.cutoff, "low-pass cutoff, fraction of Nyquist");
    det_cmd->add_option("--filter-order", det.cfg.lowpass.order, "filter order (2 or 4)");
    det_cmd->add_flag("--no-filter", det.no_filter, "disable low-pass filtering");
    det_cmd->add_option("--window", det.cfg.t_synch, "rolling correlation window t_synch");
    det_cmd->add_option("--z", det.cfg.z, "correlation threshold");
    det_cmd->add_option("--l-thresh", det.cfg.l_thresh, "l_pair event threshold");
    det_cmd->add_option("--min-gap", det.cfg.min_gap, "merge events closer than this, samples");
    det_cmd->add_option("--skip-hours", det.cfg.skip_hours, "initial rejection window, hours");
    det_cmd->add_flag("--no-self-osc-reject", det.no_self_osc,
                      "keep large-amplitude self-oscillation spans");
    det_cmd->add_option("--threads", det.cfg.threads, "worker threads (0 = SYNC_THREADS/auto)");
    det_cmd->add_flag("--multiway", det.multiway, "emit the eigenvalue multiway coefficient");
    det_cmd->add_flag("--dump-coeffs", det.dump_coeffs, "include fit coefficients in report.json");
    det_cmd->add_flag("--dump-pairs", det.dump_pairs, "dump per-pair correlations to pairs.csv");
    det_cmd->add_option("--tolerance", det.align_tolerance, "alignment tolerance, seconds");
    det_cmd->add_option("--period", det.align_period, "sample period override for alignment");
    det_cmd->add_flag("--interpolate", det.interpolate, "linearly fill missing aligned samples");

    // scan
    auto* scan_cmd = app.add_subcommand("scan", "scan t_synch for the maximal mean correlation");
    std::string scan_input, scan_out = "scan";
    int scan_min = 70, scan_max = 200, scan_step = 10;
    DetectConfig scan_cfg;
    scan_cfg.skip_hours = 24.0;
    scan_cmd->add_option("--input", scan_input, "session file")->required();
    scan_cmd->add_option("--out", scan_out, "output directory");
    scan_cmd->add_option("--min", scan_min, "smallest window");
    scan_cmd->add_option("--max", scan_max, "largest window");
    scan_cmd->add_option("--step", scan_step, "window step");
    scan_cmd->add_option("--order", scan_cfg.detrend_order, "detrend polynomial order");
    scan_cmd->add_option("--skip-hours", scan_cfg.skip_hours, "initial rejection window, hours");
    scan_cmd->add_option("--lowpass", scan_cfg.lowpass.cutoff, "low-pass cutoff");
    scan_cmd->add_option("--threads", scan_cfg.threads, "worker threads");

    // compare
    auto* cmp_cmd = app.add_subcommand("compare", "per-criterion rate ratios of two runs");
    std::string cmp_a, cmp_b, cmp_out;
    cmp_cmd->add_option("--run-a", cmp_a, "experiment run directory")->required();
    cmp_cmd->add_option("--run-b", cmp_b, "control run directory")->required();
    cmp_cmd->add_option("--out", cmp_out, "optional output directory for compare.csv");

    // report
    auto* rep_cmd = app.add_subcommand("report", "print the rate table of a completed run");
    std::string rep_dir;
    rep_cmd->add_option("--run", rep_dir, "run directory")->required();

    try {
        app.parse(argc, argv);
        if (sim_cmd->parsed()) return cmd_simulate(sim_config, sim_out, sim_seed);
        if (det_cmd->parsed()) return cmd_detect(det);
        if (scan_cmd->parsed())
            return cmd_scan(scan_input, scan_out, scan_min, scan_max, scan_step, scan_cfg);
        if (cmp_cmd->parsed()) return cmd_compare(cmp_a, cmp_b, cmp_out);
        if (rep_cmd->parsed()) return cmd_report(rep_dir);
        return kExitConfig;
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const input_error& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
}
