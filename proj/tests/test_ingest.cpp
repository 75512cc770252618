#include <catch_amalgamated.hpp>

#include <algorithm>
#include <future>
#include <thread>
#include <random>

#include "eln/error.hpp"
#include "eln/ingest.hpp"
#include "trees.hpp"

using namespace eln;
using namespace std::chrono_literals;
using namespace eln::testing;

namespace {

struct Env {
    TempDir dir;
    Catalog catalog{":memory:"};
    Linker linker{catalog};
    Ingestor ingestor{catalog, linker};
    Env() { seed_standard(catalog); }
    IngestReport run(Timestamp now, RecencyPolicy policy = {}) {
        return ingestor.generate_entries(dir.path(), policy, now);
    }
};

const std::string kExample =
    "01_Main_Exp/01_OCA_35_XL/20210201/Probe_BA_01/171700_osz_wasser_laengest.png";

std::size_t count_reason(const IngestReport& r, SkipReason reason) {
    return static_cast<std::size_t>(std::count_if(
        r.skipped.begin(), r.skipped.end(), [&](const auto& s) { return s.reason == reason; }));
}

}  // namespace

TEST_CASE("documented example is a candidate one day later") {
    Env env;
    write_file(env.dir / kExample);
    auto now = ts("2021-02-02T17:17:00");
    auto result = scan(env.dir.path(), default_grammars(), env.catalog.path_rules(), {}, now);
    REQUIRE(result.candidates.size() == 1);
    CHECK(result.skipped.empty());
    const auto& c = result.candidates[0];
    CHECK(c.meta.device_code == "OCA");
    CHECK(c.meta.sample_name == "BA_01");
    CHECK(format_iso(*c.meta.observed_at) == "2021-02-01T17:17:00");
    CHECK(c.rule.instrument_variant == "35_XL");
    CHECK_FALSE(c.time_from_mtime);
}

TEST_CASE("six-day-old file is too old") {
    Env env;
    write_file(env.dir / kExample);
    auto r = scan(env.dir.path(), default_grammars(), env.catalog.path_rules(), {},
                  ts("2021-02-07T17:17:00"));
    CHECK(r.candidates.empty());
    REQUIRE(r.skipped.size() == 1);
    CHECK(r.skipped[0].reason == SkipReason::too_old);
    CHECK(r.skipped[0].path == kExample);
}

TEST_CASE("recency boundary is inclusive") {
    Env env;
    write_file(env.dir / kExample);
    auto t = ts("2021-02-01T17:17:00");
    auto rules = env.catalog.path_rules();
    auto at = scan(env.dir.path(), default_grammars(), rules, {}, t + 5 * 24h);
    CHECK(at.candidates.size() == 1);
    auto past = scan(env.dir.path(), default_grammars(), rules, {}, t + 5 * 24h + 1s);
    REQUIRE(past.skipped.size() == 1);
    CHECK(past.skipped[0].reason == SkipReason::too_old);
    auto off = scan(env.dir.path(), default_grammars(), rules, {Seconds{5 * 86400}, false},
                    t + 400 * 24h);
    CHECK(off.candidates.size() == 1);
}

TEST_CASE("disallowed extension is skipped") {
    Env env;
    auto t = ts("2021-02-01T17:17:00");
    auto rel = place(env.dir.path(), TreeKind::main, t, "BA_01", "x", "tmp");
    auto r = scan(env.dir.path(), default_grammars(), env.catalog.path_rules(), {}, t + 1h);
    REQUIRE(r.skipped.size() == 1);
    CHECK(r.skipped[0].reason == SkipReason::bad_extension);
    CHECK(r.skipped[0].path == rel);
}

TEST_CASE("ten files are created once and then reported as duplicates") {
    Env env;
    auto t = ts("2021-02-01T08:00:00");
    for (int i = 0; i < 10; ++i) {
        place(env.dir.path(), i % 2 ? TreeKind::sub : TreeKind::main, t + i * 10min, "BA_01",
              "run" + std::to_string(i), "csv");
    }
    auto now = t + 24h;
    auto first = env.run(now);
    CHECK(first.scanned == 10);
    CHECK(first.created == 10);
    CHECK(first.duplicates == 0);
    CHECK(first.skipped.empty());
    CHECK(first.entries.size() == 10);
    CHECK(first.links_created > 0);
    auto snap = env.catalog.snapshot();

    auto second = env.run(now);
    CHECK(second.created == 0);
    CHECK(second.duplicates == 10);
    CHECK(second.links_created == 0);
    CHECK(env.catalog.snapshot() == snap);
}

TEST_CASE("a malformed date folder skips only its file") {
    Env env;
    auto t = ts("2021-02-01T08:00:00");
    for (int i = 0; i < 9; ++i) {
        place(env.dir.path(), TreeKind::main, t + i * 1min, "BA_01", "ok", "png");
    }
    auto bad = "01_Main_Exp/" + kMainDevice + "/20211301/Probe_BA_01/080000_bad.png";
    write_file(env.dir / bad);
    auto r = env.run(t + 1h);
    CHECK(r.scanned == 10);
    CHECK(r.created == 9);
    REQUIRE(r.skipped.size() == 1);
    CHECK(r.skipped[0].reason == SkipReason::parse_failure);
    CHECK(r.skipped[0].path == bad);
}

TEST_CASE("unregistered sample and unmatched rule are reported") {
    Env env;
    auto t = ts("2021-02-01T08:00:00");
    place(env.dir.path(), TreeKind::main, t, "ZZ_99", "x", "png");
    write_file(env.dir / ("01_Main_Exp/01_XRD_Bruker/20210201/Probe_BA_01/080000_x.png"));
    write_file(env.dir / ("01_Main_Exp/" + kMainDevice + "/20210201/Probe_BA_01/080000_x.png"));
    // device folder under the OCA rule path but naming a different device
    write_file(env.dir / ("01_Main_Exp/" + kMainDevice + "/sub/20210201/Probe_BA_01/080000_y.png"));
    auto r = env.run(t + 1h);
    CHECK(r.scanned == 4);
    CHECK(r.created == 1);
    CHECK(count_reason(r, SkipReason::unknown_sample) == 1);
    CHECK(count_reason(r, SkipReason::unmatched_rule) == 1);
    CHECK(count_reason(r, SkipReason::parse_failure) == 1);
    CHECK(env.catalog.query_entries({}).size() == 1);
}

TEST_CASE("files without a time prefix fall back to the file mtime") {
    Env env;
    auto rel = "01_Main_Exp/" + kMainDevice + "/20210201/Probe_BA_01/notime.png";
    write_file(env.dir / rel);
    set_mtime(env.dir / rel, ts("2021-02-01T09:30:00"));
    auto r = env.run(ts("2021-02-02T00:00:00"));
    REQUIRE(r.created == 1);
    auto e = env.catalog.get_entry(r.entries[0]);
    CHECK(format_iso(e.observed_at) == "2021-02-01T09:30:00");
    CHECK(e.extra.at("time_source") == "file_mtime");

    // mtime on another day: folder date with the mtime clock
    Env other;
    write_file(other.dir / rel);
    set_mtime(other.dir / rel, ts("2021-03-05T09:30:00"));
    auto r2 = other.run(ts("2021-02-02T00:00:00"));
    REQUIRE(r2.created == 1);
    CHECK(format_iso(other.catalog.get_entry(r2.entries[0]).observed_at) == "2021-02-01T09:30:00");
}

TEST_CASE("new entries carry profile defaults and variant") {
    TempDir dir;
    Catalog catalog(":memory:");
    seed_standard(catalog);
    Linker linker(catalog);
    IngestOptions opts;
    opts.profiles["OCA"] = {{"liquid", "water"}, {"instrument_variant", "overridden"}};
    Ingestor ingestor(catalog, linker, opts);
    write_file(dir / kExample);
    auto r = ingestor.generate_entries(dir.path(), {}, ts("2021-02-02T00:00:00"));
    REQUIRE(r.created == 1);
    auto e = catalog.get_entry(r.entries[0]);
    CHECK(e.extra.at("liquid") == "water");
    CHECK(e.extra.at("instrument_variant") == "35_XL");
    CHECK(e.extra.at("time_source") == "filename");
}

TEST_CASE("ingest links subs and notes") {
    Env env;
    auto t = ts("2021-02-01T17:17:00");
    env.catalog.add_note("BA_01", t - 1h, "prepared");
    place(env.dir.path(), TreeKind::main, t, "BA_01", "m", "png");
    place(env.dir.path(), TreeKind::sub, t + 13min, "BA_01", "s", "csv");
    auto r = env.run(t + 1h);
    REQUIRE(r.created == 2);
    CHECK(r.links_created == 3);
    auto mains = env.catalog.query_entries({.kind = TreeKind::main});
    REQUIRE(mains.size() == 1);
    CHECK(env.catalog.links_from(mains[0].id, LinkType::main_sub).size() == 1);
}

TEST_CASE("latest_report tracks runs") {
    Env env;
    try {
        env.ingestor.latest_report();
        FAIL("expected NoReports");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::no_reports);
    }
    auto t = ts("2021-02-01T08:00:00");
    place(env.dir.path(), TreeKind::main, t, "BA_01", "a", "png");
    auto r1 = env.run(t + 1h);
    auto l1 = env.ingestor.latest_report();
    CHECK(l1.created == 1);
    CHECK(l1.scanned == r1.scanned);
    CHECK(l1.entries == r1.entries);
    CHECK(l1.now_reference == t + 1h);
    place(env.dir.path(), TreeKind::main, t + 1min, "BA_01", "b", "png");
    env.run(t + 2h);
    auto l2 = env.ingestor.latest_report();
    CHECK(l2.created == 1);
    CHECK(l2.duplicates == 1);
    CHECK(l2.now_reference == t + 2h);
    CHECK(env.catalog.report_count() == 2);
}

TEST_CASE("missing root is RootUnreadable") {
    Env env;
    try {
        env.ingestor.generate_entries(env.dir / "nope", {}, ts("2021-02-01T00:00:00"));
        FAIL("expected RootUnreadable");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::root_unreadable);
    }
    CHECK(env.catalog.report_count() == 0);
}

TEST_CASE("missing tree marker yields an empty run") {
    Env env;
    auto r = env.run(ts("2021-02-01T00:00:00"));
    CHECK(r.scanned == 0);
    CHECK(r.created == 0);
}

TEST_CASE("a concurrent run is rejected as busy") {
    TempDir dir;
    auto db = (dir / "store.db").string();
    Catalog catalog(db);
    seed_standard(catalog);
    Linker linker(catalog);
    Ingestor ingestor(catalog, linker);
    auto t = ts("2021-02-01T08:00:00");
    for (int i = 0; i < 300; ++i) {
        place(dir.path(), TreeKind::main, t + i * 1s, "BA_01", "f" + std::to_string(i), "png");
    }
    // Hold the catalog writer so whichever run takes the run lock stalls inside it.
    std::promise<void> inside, release;
    std::thread holder([&] {
        catalog.write([&] {
            inside.set_value();
            release.get_future().wait();
        });
    });
    inside.get_future().wait();
    auto attempt = [&] {
        try {
            return static_cast<long>(ingestor.generate_entries(dir.path(), {}, t + 1h).created);
        } catch (const Error& e) {
            return e.code() == ErrorCode::busy ? -1L : -2L;
        }
    };
    auto a = std::async(std::launch::async, attempt);
    auto b = std::async(std::launch::async, attempt);
    std::this_thread::sleep_for(300ms);
    release.set_value();
    holder.join();
    std::vector<long> outcomes{a.get(), b.get()};
    std::sort(outcomes.begin(), outcomes.end());
    CHECK(outcomes == std::vector<long>{-1, 300});
}

TEST_CASE("report accounting holds on random trees", "[property]") {
    std::mt19937 rng(7);
    auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    for (int round = 0; round < 20; ++round) {
        Env env;
        auto now = ts("2021-02-10T12:00:00");
        for (int i = 0, n = pick(0, 40); i < n; ++i) {
            auto at = now - Seconds{pick(0, 8 * 86400)};
            auto kind = pick(0, 1) ? TreeKind::main : TreeKind::sub;
            const char* exts[] = {"png", "csv", "txt", "tmp"};
            const char* samples[] = {"BA_01", "CC_01", "ZZ_99"};
            place(env.dir.path(), kind, at, samples[pick(0, 2)], "d" + std::to_string(i),
                  exts[pick(0, 3)]);
        }
        auto r = env.run(now);
        CHECK(r.scanned == r.created + r.duplicates + r.skipped.size());
        auto again = env.run(now);
        CHECK(again.created == 0);
        CHECK(again.duplicates == r.created);
        CHECK(again.scanned == again.created + again.duplicates + again.skipped.size());
    }
}
