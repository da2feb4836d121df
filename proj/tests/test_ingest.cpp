#include <doctest.h>

#include <random>
#include <sstream>

#include "synckit/ingest.hpp"

using namespace synckit;

namespace {

const char* kSchemaText =
    "time=timestamp\n"
    "dev=device_id\n"
    "z1=impedance\n"
    "z2=impedance\n"
    "t1=fluid_temp\n"
    "press=env\n";

ColumnSchema test_schema() {
    std::istringstream in(kSchemaText);
    return ColumnSchema::load(in);
}

ParsedStream parse_text(const std::string& text, bool with_schema = true) {
    std::istringstream in(text);
    ParseOptions opts;
    opts.default_device = "dev0";
    if (with_schema) return parse_log(in, test_schema(), opts);
    return parse_log(in, {}, opts);
}

// Uniform streams for alignment tests: timestamps t0 + k * period + jitter.
ParsedStream make_stream(const std::string& device, double t0, double period, std::size_t n,
                         double shift = 0.0) {
    ParsedStream s;
    s.meta.device_id = device;
    s.meta.impedance_names = {"z1"};
    s.meta.schema.columns = {{"time", ColumnSchema::Role::timestamp},
                             {"z1", ColumnSchema::Role::impedance}};
    for (std::size_t k = 0; k < n; ++k) {
        SampleRecord rec;
        rec.timestamp = t0 + static_cast<double>(k) * period + shift;
        rec.device_id = device;
        rec.impedance = {100000.0 + static_cast<double>(k)};
        s.records.push_back(std::move(rec));
    }
    return s;
}

}  // namespace

TEST_CASE("parse_log maps a valid CSV line into a record") {
    auto s = parse_text(
        "time,dev,z1,z2,t1,press\n"
        "1660000000.0,A,101325.0,99000.5,24.25,1013.0\n");
    REQUIRE(s.issues.empty());
    REQUIRE(s.records.size() == 1);
    const auto& r = s.records[0];
    CHECK(r.timestamp == 1660000000.0);
    CHECK(r.device_id == "A");
    CHECK(r.impedance == std::vector<double>{101325.0, 99000.5});
    CHECK(r.fluid_temp == std::vector<double>{24.25});
    CHECK(r.env == std::vector<double>{1013.0});
    CHECK(s.meta.device_id == "A");
}

TEST_CASE("parse_log on empty input gives empty list and zero issues") {
    std::istringstream in("");
    auto s = parse_log(in);
    CHECK(s.records.empty());
    CHECK(s.issues.empty());
}

TEST_CASE("non-positive impedance becomes an issue with its line number") {
    auto s = parse_text(
        "time,dev,z1,z2,t1,press\n"
        "1.0,A,100.0,100.0,24.0,1.0\n"
        "2.0,A,-5,100.0,24.0,1.0\n"
        "3.0,A,100.0,100.0,24.0,1.0\n");
    REQUIRE(s.issues.size() == 1);
    CHECK(s.issues[0].line == 3);
    CHECK(s.issues[0].message.find("non-positive impedance") != std::string::npos);
    CHECK(s.records.size() == 2);
}

TEST_CASE("non-numeric fields and non-monotonic timestamps are counted, not dropped silently") {
    auto s = parse_text(
        "time,dev,z1,z2,t1,press\n"
        "1.0,A,100.0,100.0,24.0,1.0\n"
        "2.0,A,oops,100.0,24.0,1.0\n"
        "3.0,A,100.0,100.0,24.0,1.0\n"
        "1.5,A,100.0,100.0,24.0,1.0\n"
        "3.5,A,100.0,100.0,24.0\n");
    REQUIRE(s.records.size() == 2);
    REQUIRE(s.issues.size() == 3);
    CHECK(s.issues[0].line == 3);
    CHECK(s.issues[0].message.find("non-numeric") != std::string::npos);
    CHECK(s.issues[1].line == 5);
    CHECK(s.issues[1].message.find("non-monotonic") != std::string::npos);
    CHECK(s.issues[2].line == 6);  // wrong field count
}

TEST_CASE("unknown column is a structured input error") {
    std::istringstream in("time,dev,z1,z2,t1,bogus\n");
    CHECK_THROWS_AS(parse_log(in, test_schema()), input_error);
    std::istringstream in2("time,z1\n");  // schema wants more columns
    CHECK_THROWS_AS(parse_log(in2, test_schema()), input_error);
}

TEST_CASE("schema inference classifies common column names") {
    auto s = parse_text(
        "timestamp,imp_a,imp_b,temp_a,co2\n"
        "1.0,100.0,100.0,24.0,1400\n",
        false);
    REQUIRE(s.records.size() == 1);
    CHECK(s.meta.impedance_names == std::vector<std::string>{"imp_a", "imp_b"});
    CHECK(s.meta.fluid_temp_names == std::vector<std::string>{"temp_a"});
    CHECK(s.meta.env_names == std::vector<std::string>{"co2"});
}

TEST_CASE("round-trip: serialize(parse(lines)) keeps numeric fields bit-exact") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> imp(1.0, 2e5);
    std::uniform_real_distribution<double> temp(-40.0, 60.0);
    std::ostringstream src;
    src << "time,dev,z1,z2,t1,press\n";
    double ts = 1660000000.0;
    for (int i = 0; i < 200; ++i) {
        ts += std::uniform_real_distribution<double>(0.5, 5.0)(rng);
        src << format_double(ts) << ",A," << format_double(imp(rng)) << ','
            << format_double(imp(rng)) << ',' << format_double(temp(rng)) << ','
            << format_double(temp(rng) * 17.3) << '\n';
    }
    auto first = parse_text(src.str());
    REQUIRE(first.issues.empty());
    std::ostringstream out;
    save_log_csv(first, out);
    std::istringstream back(out.str());
    auto second = parse_log(back, test_schema());
    REQUIRE(second.records.size() == first.records.size());
    for (std::size_t i = 0; i < first.records.size(); ++i) {
        CHECK(first.records[i].timestamp == second.records[i].timestamp);
        CHECK(first.records[i].impedance == second.records[i].impedance);
        CHECK(first.records[i].fluid_temp == second.records[i].fluid_temp);
        CHECK(first.records[i].env == second.records[i].env);
    }
}

TEST_CASE("align: identical timestamps need no interpolation and match every tick") {
    auto a = make_stream("A", 1000.0, 2.0, 50);
    auto b = make_stream("B", 1000.0, 2.0, 50);
    auto aligned = align({a, b}, {.tolerance = 1.0});
    CHECK(aligned.report.interpolated_samples == 0);
    CHECK(aligned.session.n_samples == 50);
    for (const auto& dev : aligned.report.devices) {
        CHECK(dev.kept == 50);
        CHECK(dev.dropped == 0);
        CHECK(dev.clock_offset == doctest::Approx(0.0).epsilon(1e-12));
    }
    for (const auto& c : aligned.session.channels)
        for (double v : c.values) CHECK(!is_missing(v));
}

TEST_CASE("align: 0.4 s shift within tolerance matches all records, offset reported") {
    auto a = make_stream("A", 1000.0, 2.0, 100);
    auto b = make_stream("B", 1000.0, 2.0, 100, 0.4);
    auto aligned = align({a, b}, {.tolerance = 1.0});
    REQUIRE(aligned.report.devices.size() == 2);
    const auto& ra = aligned.report.devices[0];
    const auto& rb = aligned.report.devices[1];
    CHECK(ra.dropped + ra.kept == ra.total_records);
    CHECK(rb.dropped + rb.kept == rb.total_records);
    CHECK(ra.kept >= 99);
    CHECK(rb.kept >= 99);
    // relative device offset reproduces the injected 0.4 s shift
    CHECK(std::abs((rb.clock_offset - ra.clock_offset) - 0.4) < 1.0);  // < period/2
    CHECK(rb.clock_offset - ra.clock_offset == doctest::Approx(0.4).epsilon(1e-9));

    // exhaustive nearest-tick check: every kept record sits closest to its tick
    const double t0 = aligned.session.t0;
    const double period = aligned.report.sample_period;
    auto imp = aligned.session.spans_of_kind(ChannelKind::impedance);
    for (const auto& rec : b.records) {
        auto k = static_cast<std::ptrdiff_t>(std::llround((rec.timestamp - t0) / period));
        if (k < 0 || k >= static_cast<std::ptrdiff_t>(aligned.session.n_samples)) continue;
        double best = std::abs(rec.timestamp - (t0 + static_cast<double>(k) * period));
        for (std::ptrdiff_t other = k - 2; other <= k + 2; ++other)
            if (other != k && other >= 0)
                CHECK(best <= std::abs(rec.timestamp - (t0 + static_cast<double>(other) * period)));
        CHECK(imp[1][static_cast<std::size_t>(k)] == rec.impedance[0]);
    }
}

TEST_CASE("align: disjoint time ranges is an overlap error") {
    auto a = make_stream("A", 1000.0, 2.0, 10);
    auto b = make_stream("B", 5000.0, 2.0, 10);
    CHECK_THROWS_AS(align({a, b}, {.tolerance = 1.0}), input_error);
}

TEST_CASE("align: two records matching one tick within tolerance is ambiguous") {
    auto a = make_stream("A", 1000.0, 10.0, 5);
    SampleRecord extra;
    extra.timestamp = 1000.3;  // 0.3 s after the first record, same nearest tick
    extra.device_id = "A";
    extra.impedance = {123456.0};
    a.records.insert(a.records.begin() + 1, extra);
    try {
        align({a, make_stream("B", 1000.0, 10.0, 5)}, {.tolerance = 1.0});
        FAIL("expected ambiguity error");
    } catch (const input_error& e) {
        std::string msg = e.what();
        CHECK(msg.find("ambiguous") != std::string::npos);
        CHECK(msg.find("1000.3") != std::string::npos);
    }
}

TEST_CASE("align is permutation-invariant up to channel order") {
    auto a = make_stream("A", 1000.0, 2.0, 60, 0.1);
    auto b = make_stream("B", 1001.0, 2.0, 60, -0.2);
    auto ab = align({a, b}, {.tolerance = 1.0});
    auto ba = align({b, a}, {.tolerance = 1.0});
    CHECK(ab.session.t0 == ba.session.t0);
    CHECK(ab.session.n_samples == ba.session.n_samples);
    for (const auto& ca : ab.session.channels) {
        bool found = false;
        for (const auto& cb : ba.session.channels)
            if (cb.id == ca.id) {
                found = true;
                CHECK(ca.values == cb.values);
            }
        CHECK(found);
    }
}

TEST_CASE("align: gaps become missing samples; interpolation fills and counts them") {
    auto a = make_stream("A", 1000.0, 2.0, 50);
    a.records.erase(a.records.begin() + 10, a.records.begin() + 13);
    auto plain = align({a}, {.tolerance = 0.5});
    std::size_t missing = 0;
    for (double v : plain.session.channels[0].values) missing += is_missing(v);
    CHECK(missing == 3);

    auto filled = align({a}, {.tolerance = 0.5, .interpolate = true});
    CHECK(filled.report.interpolated_samples == 3);
    for (double v : filled.session.channels[0].values) CHECK(!is_missing(v));
}

TEST_CASE("slice_frame: identity, shift and range error") {
    auto aligned = align({make_stream("A", 1000.0, 2.0, 5000)}, {.tolerance = 1.0});
    const Session& s = aligned.session;

    Session whole = slice_frame(s, 0, s.n_samples);
    CHECK(whole.n_samples == s.n_samples);
    CHECK(whole.t0 == s.t0);
    CHECK(whole.channels[0].values == s.channels[0].values);

    Session part = slice_frame(s, 100, 2000);
    CHECK(part.n_samples == 2000);
    CHECK(part.t0 == doctest::Approx(s.t0 + 100 * 2.0));
    CHECK(part.channels[0].values[0] == s.channels[0].values[100]);
    CHECK(part.provenance.find("slice") != std::string::npos);

    CHECK_THROWS_AS(slice_frame(s, 4000, 2000), config_error);
}

TEST_CASE("reject_initial drops the first day") {
    Session s;
    s.sample_period = 3600.0;  // 1 sample per hour keeps the test tiny
    s.n_samples = 72;
    ChannelSeries c;
    c.id = "x";
    c.kind = ChannelKind::impedance;
    for (int i = 0; i < 72; ++i) c.values.push_back(100000.0 + i);
    s.channels.push_back(c);

    Session cut = reject_initial(s, 24.0);
    CHECK(cut.n_samples == 48);
    CHECK(cut.channels[0].values.front() == 100024.0);

    Session same = reject_initial(s, 0.0);
    CHECK(same.n_samples == 72);

    Session short_session = slice_frame(s, 0, 12);
    try {
        reject_initial(short_session, 24.0);
        FAIL("expected rejection-window error");
    } catch (const input_error& e) {
        CHECK(std::string(e.what()).find("rejection window") != std::string::npos);
    }
}

TEST_CASE("session CSV round trip preserves values and metadata") {
    auto aligned = align({make_stream("A", 1000.0, 2.0, 40)}, {.tolerance = 1.0});
    Session& s = aligned.session;
    s.channels[0].values[7] = kMissing;
    std::ostringstream out;
    save_session_csv(s, out);
    std::istringstream in(out.str());
    Session back = load_session_csv(in);
    CHECK(back.sample_period == s.sample_period);
    CHECK(back.t0 == s.t0);
    CHECK(back.n_samples == s.n_samples);
    REQUIRE(back.channels.size() == s.channels.size());
    CHECK(back.channels[0].kind == ChannelKind::impedance);
    CHECK(back.channels[0].unit == "Ohm");
    for (std::size_t i = 0; i < s.n_samples; ++i) {
        if (is_missing(s.channels[0].values[i]))
            CHECK(is_missing(back.channels[0].values[i]));
        else
            CHECK(back.channels[0].values[i] == s.channels[0].values[i]);
    }
}
