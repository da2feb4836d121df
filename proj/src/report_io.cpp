#include "synckit/report_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace synckit {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw input_error("cannot open '" + path + "' for writing");
    return f;
}

std::string criterion_r(double threshold) { return "r_mean>" + format_double(threshold); }
std::string criterion_l(double threshold) { return "l_pair>" + format_double(threshold); }

}  // namespace

void write_events_json(const DetectResult& r, const std::string& path) {
    ordered_json doc;
    doc["t_synch"] = r.config.t_synch;
    doc["z"] = r.config.z;
    doc["l_thresh"] = r.config.l_thresh;
    doc["min_gap"] = r.config.min_gap;
    doc["n_samples"] = r.n_samples;
    doc["n_events"] = r.events.size();
    ordered_json events = ordered_json::array();
    for (const auto& e : r.events) {
        ordered_json je;
        je["start"] = e.start;
        je["end"] = e.end;
        je["duration_samples"] = e.end - e.start;
        je["start_time_s"] = r.t0 + static_cast<double>(e.start) * r.sample_period;
        je["end_time_s"] = r.t0 + static_cast<double>(e.end) * r.sample_period;
        je["peak_index"] = e.peak_index;
        je["peak_r_mean"] = e.peak_r_mean;
        je["peak_l_pair_signed"] = e.peak_l_pair_signed;
        je["peak_l_pair_abs"] = e.peak_l_pair_abs;
        ordered_json cells = ordered_json::array();
        for (int c : e.involved_cells)
            cells.push_back(static_cast<std::size_t>(c) < r.impedance_ids.size()
                                ? r.impedance_ids[static_cast<std::size_t>(c)]
                                : std::to_string(c));
        je["involved_cells"] = std::move(cells);
        je["phase"] = to_string(e.phase);
        je["trigger"] = to_string(e.trigger);
        je["low_confidence"] = e.low_confidence;
        events.push_back(std::move(je));
    }
    doc["events"] = std::move(events);
    open_out(path) << doc.dump(2) << '\n';
}

void write_rates_csv(const DetectResult& r, const std::string& path) {
    auto f = open_out(path);
    f << "criterion,mode,n_smp,t_exp_s,rate_per_s\n";
    const RateReport& rates = r.rates;
    auto row = [&](const std::string& criterion, const char* mode, const RateCell& cell) {
        f << criterion << ',' << mode << ',' << cell.n_smp << ','
          << format_double(rates.t_exp) << ',' << format_double(cell.rate) << '\n';
    };
    for (std::size_t i = 0; i < rates.r_thresholds.size(); ++i)
        row(criterion_r(rates.r_thresholds[i]), "signed", rates.r_mean_cells[i]);
    for (std::size_t i = 0; i < rates.l_thresholds.size(); ++i) {
        row(criterion_l(rates.l_thresholds[i]), "signed", rates.l_signed[i]);
        row(criterion_l(rates.l_thresholds[i]), "absolute", rates.l_abs[i]);
    }
}

void write_metrics_csv(const DetectResult& r, const std::string& path) {
    auto f = open_out(path);
    bool with_multiway = !r.multiway.empty();
    f << "index,time_s,r_mean,l_pair_signed,l_pair_abs,defined_pairs";
    if (with_multiway) f << ",multiway";
    f << '\n';
    const auto& m = r.metrics;
    for (std::size_t i = 0; i < m.size(); ++i) {
        f << i << ',' << format_double(r.t0 + static_cast<double>(i) * r.sample_period) << ','
          << format_double(m.r_mean[i]) << ',' << format_double(m.l_pair_signed[i]) << ','
          << format_double(m.l_pair_abs[i]) << ',' << m.defined_pairs[i];
        if (with_multiway) f << ',' << format_double(r.multiway[i]);
        f << '\n';
    }
}

void write_subset_csv(const DetectResult& r, const std::string& path) {
    auto f = open_out(path);
    f << "index,n_pairs_signed,n_cells_signed,ratio_signed,n_pairs_abs,n_cells_abs,ratio_abs\n";
    for (std::size_t i = 0; i < r.subset_signed.ratio.size(); ++i) {
        f << i << ',' << r.subset_signed.n_pairs[i] << ',' << r.subset_signed.n_cells[i] << ','
          << format_double(r.subset_signed.ratio[i]) << ',' << r.subset_abs.n_pairs[i] << ','
          << r.subset_abs.n_cells[i] << ',' << format_double(r.subset_abs.ratio[i]) << '\n';
    }
}

void write_groups_csv(const DetectResult& r, const std::string& path) {
    if (!r.has_groups) return;
    auto f = open_out(path);
    f << "index,imp_imp,temp_temp,imp_temp\n";
    for (std::size_t i = 0; i < r.groups.imp_imp.size(); ++i)
        f << i << ',' << format_double(r.groups.imp_imp[i]) << ','
          << format_double(r.groups.temp_temp[i]) << ',' << format_double(r.groups.imp_temp[i])
          << '\n';
}

void write_report_json(const DetectResult& r, const std::string& path, bool dump_coeffs) {
    ordered_json doc;
    ordered_json config;
    config["detrend_order"] = r.config.detrend_order;
    config["frame_len"] = r.config.frame_len;
    config["filter_enabled"] = r.config.filter_enabled;
    config["lowpass_cutoff"] = r.config.lowpass.cutoff;
    config["lowpass_order"] = r.config.lowpass.order;
    config["t_synch"] = r.config.t_synch;
    config["z"] = r.config.z;
    config["l_thresh"] = r.config.l_thresh;
    config["min_gap"] = r.config.min_gap;
    config["skip_hours"] = r.config.skip_hours;
    config["self_osc_rejection"] = r.config.self_osc_rejection;
    doc["config"] = std::move(config);
    doc["n_samples"] = r.n_samples;
    doc["skipped_samples"] = r.skipped_samples;
    doc["dropped_tail_samples"] = r.dropped_tail_samples;
    doc["sample_period"] = r.sample_period;
    doc["t_exp_s"] = r.t_exp;
    doc["impedance_channels"] = r.impedance_ids;
    doc["temperature_channels"] = r.temperature_ids;
    doc["self_osc_masked_samples"] = r.self_osc_masked;
    doc["n_events"] = r.events.size();
    if (r.has_groups) {
        ordered_json groups;
        groups["imp_imp_pairs"] = r.groups.n_imp_pairs;
        groups["temp_temp_pairs"] = r.groups.n_temp_pairs;
        groups["imp_temp_pairs"] = r.groups.n_cross_pairs;
        doc["groups"] = std::move(groups);
    }
    ordered_json fits = ordered_json::array();
    for (const auto& fit : r.fits) {
        ordered_json jf;
        jf["frame_start"] = fit.frame_start;
        jf["channel"] = fit.channel_id;
        jf["iterations"] = fit.report.iterations;
        jf["final_sse"] = fit.report.final_sse;
        jf["converged"] = fit.report.converged;
        jf["final_damping"] = fit.report.final_damping;
        jf["n_valid"] = fit.report.n_valid;
        if (dump_coeffs) jf["coefficients"] = fit.coefficients;
        fits.push_back(std::move(jf));
    }
    doc["fits"] = std::move(fits);
    open_out(path) << doc.dump(2) << '\n';
}

std::string rates_table_text(const DetectResult& r) {
    std::ostringstream os;
    const RateReport& rates = r.rates;
    os << "t_exp " << format_double(rates.t_exp) << " s, " << r.n_samples << " samples, window "
       << r.config.t_synch << "\n";
    os << "criterion        ";
    for (double t : rates.r_thresholds) os << "  " << criterion_r(t);
    for (double t : rates.l_thresholds) os << "  " << criterion_l(t);
    os << "\nrate/s (signed)  ";
    for (const auto& c : rates.r_mean_cells) os << "  " << format_double(c.rate);
    for (const auto& c : rates.l_signed) os << "  " << format_double(c.rate);
    os << "\nrate/s (absolute)";
    for (std::size_t i = 0; i < rates.r_thresholds.size(); ++i) os << "  -";
    for (const auto& c : rates.l_abs) os << "  " << format_double(c.rate);
    os << '\n';
    return os.str();
}

std::vector<RateRow> load_rates_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw input_error("cannot open rates file '" + path + "'");
    std::vector<RateRow> rows;
    std::string line;
    if (!std::getline(f, line)) throw input_error("empty rates file '" + path + "'");
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        RateRow row;
        std::istringstream ls(line);
        std::string n_smp, t_exp, rate;
        if (!std::getline(ls, row.criterion, ',') || !std::getline(ls, row.mode, ',') ||
            !std::getline(ls, n_smp, ',') || !std::getline(ls, t_exp, ',') ||
            !std::getline(ls, rate, ','))
            throw input_error("malformed rates row '" + line + "'");
        row.n_smp = std::stoull(n_smp);
        if (!parse_double(t_exp, row.t_exp) || !parse_double(rate, row.rate))
            throw input_error("malformed rates row '" + line + "'");
        rows.push_back(std::move(row));
    }
    return rows;
}

std::size_t count_events_json(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw input_error("cannot open events file '" + path + "'");
    json doc = json::parse(f);
    return doc.at("events").size();
}

namespace {

std::string ratio_string(double a, double b) {
    if (a == b) return "1";
    if (b == 0.0) return "inf(B=0)";
    return format_double(a / b);
}

}  // namespace

CompareReport compare_runs(const std::string& run_dir_a, const std::string& run_dir_b) {
    auto rows_a = load_rates_csv(run_dir_a + "/rates.csv");
    auto rows_b = load_rates_csv(run_dir_b + "/rates.csv");
    if (rows_a.size() != rows_b.size())
        throw input_error("rate reports have different criteria and cannot be compared");
    CompareReport rep;
    for (std::size_t i = 0; i < rows_a.size(); ++i) {
        const RateRow& a = rows_a[i];
        const RateRow& b = rows_b[i];
        if (a.criterion != b.criterion || a.mode != b.mode)
            throw input_error("rate criterion mismatch: '" + a.criterion + "/" + a.mode +
                              "' vs '" + b.criterion + "/" + b.mode + "'");
        CompareRow row;
        row.criterion = a.criterion;
        row.mode = a.mode;
        row.n_a = a.n_smp;
        row.n_b = b.n_smp;
        row.rate_a = a.rate;
        row.rate_b = b.rate;
        row.ratio = ratio_string(a.rate, b.rate);
        rep.rows.push_back(std::move(row));
    }
    rep.events_a = count_events_json(run_dir_a + "/events.json");
    rep.events_b = count_events_json(run_dir_b + "/events.json");
    rep.event_ratio = ratio_string(static_cast<double>(rep.events_a),
                                   static_cast<double>(rep.events_b));
    return rep;
}

std::string compare_table_text(const CompareReport& rep) {
    std::ostringstream os;
    os << "criterion,mode: rate_A / rate_B = ratio (counts A:B)\n";
    for (const auto& row : rep.rows)
        os << "  " << row.criterion << ',' << row.mode << ": " << format_double(row.rate_a)
           << " / " << format_double(row.rate_b) << " = " << row.ratio << " (" << row.n_a << ':'
           << row.n_b << ")\n";
    os << "events: " << rep.events_a << " vs " << rep.events_b << ", ratio " << rep.event_ratio
       << '\n';
    return os.str();
}

void write_compare_csv(const CompareReport& rep, const std::string& path) {
    auto f = open_out(path);
    f << "criterion,mode,n_a,n_b,rate_a,rate_b,ratio\n";
    for (const auto& row : rep.rows)
        f << row.criterion << ',' << row.mode << ',' << row.n_a << ',' << row.n_b << ','
          << format_double(row.rate_a) << ',' << format_double(row.rate_b) << ',' << row.ratio
          << '\n';
    f << "events,," << rep.events_a << ',' << rep.events_b << ",,," << rep.event_ratio << '\n';
}

}  // namespace synckit
