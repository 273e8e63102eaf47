#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <cmfa/errors.hpp>
#include <cmfa/eval.hpp>
#include <cmfa/image_io.hpp>
#include <cmfa/region.hpp>
#include <cmfa/synth.hpp>

#include "support/reference.hpp"

namespace fs = std::filesystem;

using cmfa::BinaryMask;
using cmfa::CorpusParams;
using cmfa::DatasetLayout;
using cmfa::EvalMode;
using cmfa::GrayImage;

namespace {

// RAII scratch directory under the system temp root.
struct ScratchDir {
    fs::path path;

    explicit ScratchDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~ScratchDir() { fs::remove_all(path); }
};

void write_text(const fs::path& p, const std::string& text) {
    cmfa::write_file(p, cmfa::ImageBytes(text.begin(), text.end()));
}

// Dataset with constant images and two-square masks: every radius vote ties.
void write_constant_entry(const fs::path& root, const std::string& id) {
    fs::create_directories(root / "images");
    fs::create_directories(root / "masks");
    fs::create_directories(root / "truth");
    GrayImage img(128, 128);
    for (auto& px : img.data) px = 90;
    BinaryMask mask(128, 128);
    for (int y = 0; y < 20; ++y) {
        for (int x = 0; x < 20; ++x) {
            mask.set(10 + x, 10 + y, true);
            mask.set(80 + x, 80 + y, true);
        }
    }
    cmfa::write_file(root / "images" / (id + ".png"), cmfa::encode_gray_png(img));
    cmfa::write_file(root / "masks" / (id + ".png"), cmfa::encode_mask(mask));
    write_text(root / "truth" / (id + ".json"),
               R"({"source_label":1,"pasted_label":2})");
}

std::vector<cmfa::CorpusSample> feathered_corpus() {
    std::vector<GrayImage> bases;
    bases.push_back(cmfa::generate_base_texture(256, 256, 900));
    bases.push_back(cmfa::generate_base_texture(256, 256, 901));
    CorpusParams params;
    params.count = 8;
    params.seed = 31;
    params.blend.mode = cmfa::BlendSpec::Mode::gaussian_feather;
    return cmfa::make_corpus(bases, params);
}

// What evaluate() should conclude for one sample, recomputed directly.
struct ManualScore {
    std::string status;
    std::vector<bool> radius_correct;
};

ManualScore manual_score(const cmfa::CorpusSample& sample) {
    const auto& truth = sample.forgery.truth;
    const auto pair = cmfa::select_pair(cmfa::connected_components(truth.mask));
    const auto verdict = cmfa::discriminate_pair(sample.forgery.image, pair, truth.mask);
    const auto names_pasted = [&](const cmfa::Region& r) {
        return r.label == truth.pasted_label;
    };
    ManualScore manual;
    for (const auto& d : verdict.decisions) {
        bool right = false;
        if (d.vote == cmfa::Vote::A_forged) right = names_pasted(pair.a);
        if (d.vote == cmfa::Vote::B_forged) right = names_pasted(pair.b);
        manual.radius_correct.push_back(right);
    }
    if (verdict.final == cmfa::Final::undecided) {
        manual.status = "undecided";
    } else {
        const auto& winner = verdict.final == cmfa::Final::A_forged ? pair.a : pair.b;
        manual.status = names_pasted(winner) ? "correct" : "incorrect";
    }
    return manual;
}

} // namespace

TEST_CASE("ingest pairs images with masks and truth, sorted by id") {
    ScratchDir dir("cmfa_eval_ingest_test");
    for (const char* id : {"b", "a", "c"}) write_constant_entry(dir.path, id);

    const auto entries = cmfa::ingest(dir.path, DatasetLayout::synth_style);
    REQUIRE(entries.size() == 3);
    CHECK(entries[0].id == "a");
    CHECK(entries[1].id == "b");
    CHECK(entries[2].id == "c");
    for (const auto& e : entries) {
        CHECK(fs::exists(e.image_path));
        CHECK(fs::exists(e.mask_path));
        REQUIRE(e.truth_path.has_value());
        CHECK(fs::exists(*e.truth_path));
    }
}

TEST_CASE("unusable dataset roots raise layout errors") {
    ScratchDir dir("cmfa_eval_layout_test");
    CHECK_THROWS_AS(cmfa::ingest(dir.path / "missing", DatasetLayout::synth_style),
                    cmfa::LayoutError);
    fs::create_directories(dir.path / "images");
    CHECK_THROWS_AS(cmfa::ingest(dir.path, DatasetLayout::synth_style), cmfa::LayoutError);

    write_constant_entry(dir.path, "x");
    fs::remove(dir.path / "truth" / "x.json");
    CHECK_THROWS_AS(cmfa::ingest(dir.path, DatasetLayout::synth_style), cmfa::LayoutError);
    // grip-style datasets may omit truth; scoring later records the gap
    const auto entries = cmfa::ingest(dir.path, DatasetLayout::grip_style);
    REQUIRE(entries.size() == 1);
    CHECK(!entries[0].truth_path.has_value());
    const auto report = cmfa::evaluate(entries, EvalMode::ground_truth_mask);
    CHECK(report.skipped == 1);
    CHECK(report.records[0].status == "skipped");
}

TEST_CASE("constant images leave every entry undecided with zero accuracy") {
    ScratchDir dir("cmfa_eval_undecided_test");
    write_constant_entry(dir.path, "a");
    write_constant_entry(dir.path, "b");

    const auto entries = cmfa::ingest(dir.path, DatasetLayout::synth_style);
    const auto report = cmfa::evaluate(entries, EvalMode::ground_truth_mask);
    CHECK(report.dataset_size == 2);
    CHECK(report.correct == 0);
    CHECK(report.incorrect == 0);
    CHECK(report.undecided == 2);
    CHECK(report.skipped == 0);
    CHECK(report.final_accuracy == 0.0);
    for (const double acc : report.radius_accuracy) CHECK(acc == 0.0);
    for (const auto& record : report.records) {
        CHECK(record.status == "undecided");
        CHECK(record.final == "undecided");
        REQUIRE(record.radius_votes.size() == 3);
        for (const auto& vote : record.radius_votes) CHECK(vote == "abstain");
    }
}

TEST_CASE("mismatched masks are skipped with a dimension reason") {
    ScratchDir dir("cmfa_eval_mismatch_test");
    write_constant_entry(dir.path, "a");
    write_constant_entry(dir.path, "bad");
    cmfa::write_file(dir.path / "masks" / "bad.png",
                     cmfa::encode_mask(BinaryMask(64, 64)));

    const auto entries = cmfa::ingest(dir.path, DatasetLayout::synth_style);
    const auto report = cmfa::evaluate(entries, EvalMode::ground_truth_mask);
    CHECK(report.dataset_size == 2);
    CHECK(report.skipped == 1);
    CHECK(report.correct + report.incorrect + report.undecided + report.skipped ==
          report.dataset_size);

    REQUIRE(report.records.size() == 2);
    CHECK(report.records[1].id == "bad");
    CHECK(report.records[1].status == "skipped");
    CHECK(report.records[1].reason.find("dimensions") != std::string::npos);
    CHECK(report.records[1].final.empty());
}

TEST_CASE("ground-truth-mask scoring matches a per-sample recomputation") {
    const auto samples = feathered_corpus();
    ScratchDir dir("cmfa_eval_scoring_test");
    cmfa::write_corpus(dir.path.string(), samples);

    const auto entries = cmfa::ingest(dir.path, DatasetLayout::synth_style);
    const auto report = cmfa::evaluate(entries, EvalMode::ground_truth_mask);
    REQUIRE(report.records.size() == samples.size());
    CHECK(report.correct + report.incorrect + report.undecided + report.skipped ==
          report.dataset_size);
    CHECK(report.skipped == 0);

    std::size_t correct = 0;
    std::vector<std::size_t> radius_correct(3, 0);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const ManualScore manual = manual_score(samples[i]);
        CAPTURE(i);
        CHECK(report.records[i].status == manual.status);
        REQUIRE(report.records[i].radius_correct.size() == manual.radius_correct.size());
        for (std::size_t j = 0; j < manual.radius_correct.size(); ++j) {
            CHECK(report.records[i].radius_correct[j] == manual.radius_correct[j]);
            radius_correct[j] += manual.radius_correct[j] ? 1 : 0;
        }
        correct += manual.status == "correct" ? 1 : 0;
    }
    CHECK(report.correct == correct);
    const double n = static_cast<double>(samples.size());
    CHECK(report.final_accuracy == doctest::Approx(correct / n).epsilon(1e-12));
    for (std::size_t j = 0; j < radius_correct.size(); ++j)
        CHECK(report.radius_accuracy[j] ==
              doctest::Approx(radius_correct[j] / n).epsilon(1e-12));

    SUBCASE("swapping the truth labels flips correct and incorrect") {
        auto swapped = samples[0].forgery.truth;
        std::swap(swapped.source_label, swapped.pasted_label);
        write_text(dir.path / "truth" / "000.json", cmfa::truth_to_json(swapped, 2) + "\n");

        const auto flipped =
            cmfa::evaluate(cmfa::ingest(dir.path, DatasetLayout::synth_style),
                           EvalMode::ground_truth_mask);
        const auto expect_flip = [](const std::string& s) {
            if (s == "correct") return std::string("incorrect");
            if (s == "incorrect") return std::string("correct");
            return s;
        };
        CHECK(flipped.records[0].status == expect_flip(report.records[0].status));
        for (std::size_t i = 1; i < report.records.size(); ++i)
            CHECK(flipped.records[i].status == report.records[i].status);
    }

    SUBCASE("reports are byte-stable across repeated evaluation") {
        const auto again = cmfa::evaluate(entries, EvalMode::ground_truth_mask);
        CHECK(cmfa::report_to_json(report) == cmfa::report_to_json(again));
        CHECK(cmfa::report_to_json(report, 2) == cmfa::report_to_json(again, 2));
        CHECK(cmfa::report_to_table(report) == cmfa::report_to_table(again));
    }
}

TEST_CASE("centroid sidecars resolve the pasted component in grip layouts") {
    const auto samples = feathered_corpus();
    // Pick a decisively scored sample so the flip below is observable.
    std::size_t pick = samples.size();
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (manual_score(samples[i]).status != "undecided") {
            pick = i;
            break;
        }
    }
    REQUIRE(pick < samples.size());
    const auto& sample = samples[pick];
    const auto& truth = sample.forgery.truth;

    const auto centroid_of = [&](int label) {
        const auto regions = cmfa::connected_components(truth.mask, 1);
        for (const auto& r : regions) {
            if (r.label != label) continue;
            double sx = 0.0, sy = 0.0;
            for (const auto p : r.pixels) {
                sx += p % static_cast<std::uint32_t>(truth.mask.width);
                sy += p / static_cast<std::uint32_t>(truth.mask.width);
            }
            const double n = static_cast<double>(r.area());
            return std::pair<double, double>{sx / n, sy / n};
        }
        FAIL("label not found");
        return std::pair<double, double>{0.0, 0.0};
    };

    ScratchDir dir("cmfa_eval_grip_test");
    fs::create_directories(dir.path / "images");
    fs::create_directories(dir.path / "masks");
    fs::create_directories(dir.path / "truth");
    cmfa::write_file(dir.path / "images" / "s0.png",
                     cmfa::encode_gray_png(sample.forgery.image));
    cmfa::write_file(dir.path / "masks" / "s0.png", cmfa::encode_mask(truth.mask));

    const auto run_with_centroid = [&](std::pair<double, double> c) {
        write_text(dir.path / "truth" / "s0.json",
                   "{\"forged_centroid\":[" + std::to_string(c.first) + "," +
                       std::to_string(c.second) + "]}");
        const auto entries = cmfa::ingest(dir.path, DatasetLayout::grip_style);
        return cmfa::evaluate(entries, EvalMode::ground_truth_mask);
    };

    const auto on_pasted = run_with_centroid(centroid_of(truth.pasted_label));
    const auto on_source = run_with_centroid(centroid_of(truth.source_label));
    CHECK(on_pasted.skipped == 0);
    CHECK(on_source.skipped == 0);
    REQUIRE(on_pasted.records[0].status != "undecided");
    const bool was_correct = on_pasted.records[0].status == "correct";
    CHECK(on_source.records[0].status == (was_correct ? "incorrect" : "correct"));
}

TEST_CASE("detected-mask mode runs the detector before discrimination") {
    std::vector<GrayImage> bases;
    bases.push_back(cmfa::generate_base_texture(256, 256, 601, {.period = 0, .noise = 24}));
    CorpusParams params;
    params.count = 3;
    params.seed = 41;
    params.shapes = CorpusParams::Shapes::rect_only;
    params.offset_step = 0;
    const auto samples = cmfa::make_corpus(bases, params);

    ScratchDir dir("cmfa_eval_detected_test");
    cmfa::write_corpus(dir.path.string(), samples);
    const auto entries = cmfa::ingest(dir.path, DatasetLayout::synth_style);
    const auto report = cmfa::evaluate(entries, EvalMode::detected_mask);

    CHECK(report.mode == EvalMode::detected_mask);
    CHECK(report.dataset_size == 3);
    CHECK(report.skipped == 0);
    CHECK(report.correct + report.incorrect + report.undecided + report.skipped ==
          report.dataset_size);
    for (const auto& record : report.records) {
        CHECK(!record.final.empty());
        CHECK(record.radius_votes.size() == 3);
    }
    CHECK(cmfa::report_to_json(report) ==
          cmfa::report_to_json(cmfa::evaluate(entries, EvalMode::detected_mask)));
}

TEST_CASE("reports serialize with fixed field order and formatting") {
    cmfa::EvalReport report;
    report.mode = EvalMode::ground_truth_mask;
    report.dataset_size = 2;
    report.correct = 1;
    report.skipped = 1;
    report.final_accuracy = 1.0;
    report.radius_accuracy = {1.0, 0.0};
    report.radii = {2.0, 3.0};
    report.neighbors = 8;
    report.band_width = 4;
    cmfa::EntryRecord good;
    good.id = "000";
    good.status = "correct";
    good.final = "A_forged";
    good.radius_votes = {"A_forged", "abstain"};
    good.radius_correct = {true, false};
    cmfa::EntryRecord bad;
    bad.id = "001";
    bad.status = "skipped";
    bad.reason = "boom";
    report.records = {good, bad};

    CHECK(cmfa::report_to_json(report) ==
          R"({"mode":"ground_truth_mask","dataset_size":2,)"
          R"("counts":{"correct":1,"incorrect":0,"undecided":0,"skipped":1},)"
          R"("accuracy":{"final":1.0,"per_radius":[{"radius":2.0,"accuracy":1.0},)"
          R"({"radius":3.0,"accuracy":0.0}]},)"
          R"("config":{"radii":[2.0,3.0],"neighbors":8,"band_width":4},)"
          R"("entries":[{"id":"000","status":"correct","final":"A_forged",)"
          R"("votes":["A_forged","abstain"]},)"
          R"({"id":"001","status":"skipped","reason":"boom"}]})");

    const std::string table = cmfa::report_to_table(report);
    CHECK(table.find("R=2") != std::string::npos);
    CHECK(table.find("R=3") != std::string::npos);
    CHECK(table.find("100.0%") != std::string::npos);
    CHECK(table.find("final") != std::string::npos);
    CHECK(table.find("correct=1 incorrect=0 undecided=0 skipped=1 total=2") !=
          std::string::npos);

    CHECK_THROWS_AS(cmfa::evaluate({}, EvalMode::ground_truth_mask), cmfa::Error);
}
