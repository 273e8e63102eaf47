#include <cstdint>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cmfa/detect.hpp"
#include "cmfa/discriminate.hpp"
#include "cmfa/errors.hpp"
#include "cmfa/eval.hpp"
#include "cmfa/image_io.hpp"
#include "cmfa/lbp.hpp"
#include "cmfa/parallel.hpp"
#include "cmfa/region.hpp"
#include "cmfa/synth.hpp"

namespace {

constexpr int kJsonIndent = 2;
constexpr uint64_t kBaseSeedStride = 7919; // per-base-texture seed spacing

struct LbpOpts {
    std::string image;
    double radius = 1.0;
    int neighbors = 8;
    std::string out;
    bool json = false;
};

struct DetectOpts {
    std::string image;
    std::string out_mask;
    int block_size = 16;
    uint32_t min_support = 50;
    bool json = false;
};

struct DiscriminateOpts {
    std::string image;
    std::string mask;
    std::vector<double> radii = {2.0, 3.0, 4.0};
    int neighbors = 8;
    int band_width = 4;
    std::string overlay;
    bool json = false;
};

struct SynthOpts {
    std::string out_dir;
    int count = 50;
    uint64_t seed = 1;
    std::string blend = "gaussian_feather";
    double sigma = 2.0;
    int band = 4;
    int bases = 5;
    uint32_t base_width = 256;
    uint32_t base_height = 256;
    int base_period = 64;
    int base_noise = 1;
    std::string shapes = "mixed";
    uint32_t min_area = 2000;
    uint32_t max_area = 6000;
    int offset_step = 64;
    bool json = false;
};

struct EvalOpts {
    std::string root;
    std::string layout = "synth";
    std::string mode = "ground_truth_mask";
    std::vector<double> radii = {2.0, 3.0, 4.0};
    int neighbors = 8;
    int band_width = 4;
    int block_size = 16;
    uint32_t min_support = 50;
    bool json = false;
};

int run_lbp(const LbpOpts& o) {
    const cmfa::GrayImage img = cmfa::load_gray(o.image);
    cmfa::LbpConfig cfg;
    cfg.radius = o.radius;
    cfg.neighbors = o.neighbors;
    const cmfa::LbpMap map = cmfa::compute_lbp(img, cfg);
    if (!o.out.empty())
        cmfa::write_file(o.out, cmfa::encode_gray_png(cmfa::lbp_debug_image(map)));

    std::vector<uint64_t> histogram(size_t{1} << o.neighbors, 0);
    for (int y = map.margin; y < map.height - map.margin; ++y)
        for (int x = map.margin; x < map.width - map.margin; ++x)
            ++histogram[map.at(x, y)];

    if (o.json) {
        nlohmann::ordered_json doc;
        doc["width"] = map.width;
        doc["height"] = map.height;
        doc["radius"] = o.radius;
        doc["neighbors"] = o.neighbors;
        doc["margin"] = map.margin;
        doc["histogram"] = histogram;
        std::cout << doc.dump(kJsonIndent) << "\n";
    } else {
        std::printf("%dx%d map, R=%g P=%d, margin %d\n", map.width, map.height, o.radius,
                    o.neighbors, map.margin);
    }
    return 0;
}

int run_detect(const DetectOpts& o) {
    const cmfa::GrayImage img = cmfa::load_gray(o.image);
    cmfa::DetectorParams params;
    params.block_size = o.block_size;
    params.min_support = o.min_support;
    const cmfa::DetectionResult result = cmfa::detect(img, params);
    if (!o.out_mask.empty())
        cmfa::write_file(o.out_mask, cmfa::encode_mask(result.mask));

    if (o.json) {
        std::cout << cmfa::detection_to_json(result, kJsonIndent) << "\n";
    } else if (result.clusters.empty()) {
        std::printf("no copy-move structure found\n");
    } else {
        for (const cmfa::ShiftCluster& c : result.clusters)
            std::printf("shift (%d, %d), support %u\n", c.dx, c.dy, c.support);
    }
    return 0;
}

int run_discriminate(const DiscriminateOpts& o) {
    const cmfa::GrayImage img = cmfa::load_gray(o.image);
    const cmfa::BinaryMask mask = cmfa::load_mask(o.mask);
    cmfa::DiscriminatorConfig cfg;
    cfg.radii = o.radii;
    cfg.neighbors = o.neighbors;
    cfg.band_width = o.band_width;

    const cmfa::RegionPair pair = cmfa::select_pair(cmfa::connected_components(mask));
    const cmfa::Verdict verdict = cmfa::discriminate_pair(img, pair, mask, cfg);

    if (!o.overlay.empty()) {
        std::vector<uint32_t> original;
        std::vector<uint32_t> duplicated;
        if (verdict.final == cmfa::Final::A_forged) {
            duplicated = pair.a.pixels;
            original = pair.b.pixels;
        } else if (verdict.final == cmfa::Final::B_forged) {
            duplicated = pair.b.pixels;
            original = pair.a.pixels;
        }
        cmfa::write_file(o.overlay, cmfa::encode_overlay(img, original, duplicated));
    }

    if (o.json) {
        std::cout << cmfa::verdict_to_json(verdict, kJsonIndent) << "\n";
    } else {
        std::printf("final: %s\n", cmfa::to_string(verdict.final).c_str());
        for (const cmfa::RadiusDecision& d : verdict.decisions) {
            std::printf("R=%g: vote=%s", d.radius, cmfa::to_string(d.vote).c_str());
            if (d.std_a && d.std_b) std::printf(" std_a=%.6g std_b=%.6g", *d.std_a, *d.std_b);
            if (!d.reason.empty()) std::printf(" (%s)", d.reason.c_str());
            std::printf("\n");
        }
        std::printf("margin: %.6g\n", verdict.margin);
    }
    return 0;
}

int run_synth(const SynthOpts& o) {
    cmfa::CorpusParams params;
    params.count = o.count;
    params.seed = o.seed;
    params.blend.mode = o.blend == "none" ? cmfa::BlendSpec::Mode::none
                                          : cmfa::BlendSpec::Mode::gaussian_feather;
    params.blend.sigma = o.sigma;
    params.blend.band = o.band;
    params.shapes = o.shapes == "rect"      ? cmfa::CorpusParams::Shapes::rect_only
                    : o.shapes == "ellipse" ? cmfa::CorpusParams::Shapes::ellipse_only
                                            : cmfa::CorpusParams::Shapes::mixed;
    params.min_area = o.min_area;
    params.max_area = o.max_area;
    params.offset_step = o.offset_step;

    cmfa::TextureParams texture;
    texture.period = o.base_period;
    texture.noise = o.base_noise;
    std::vector<cmfa::GrayImage> bases;
    bases.reserve(static_cast<size_t>(o.bases));
    for (int b = 0; b < o.bases; ++b)
        bases.push_back(cmfa::generate_base_texture(
            o.base_width, o.base_height, o.seed + kBaseSeedStride * static_cast<uint64_t>(b + 1),
            texture));

    const std::vector<cmfa::CorpusSample> samples = cmfa::make_corpus(bases, params);
    cmfa::write_corpus(o.out_dir, samples);

    if (o.json) {
        nlohmann::ordered_json doc;
        doc["out_dir"] = o.out_dir;
        doc["count"] = o.count;
        doc["seed"] = o.seed;
        doc["bases"] = o.bases;
        doc["base_period"] = o.base_period;
        doc["base_noise"] = o.base_noise;
        doc["shapes"] = o.shapes;
        doc["offset_step"] = o.offset_step;
        nlohmann::ordered_json blend;
        blend["mode"] = cmfa::to_string(params.blend.mode);
        blend["sigma"] = params.blend.sigma;
        blend["band"] = params.blend.band;
        doc["blend"] = std::move(blend);
        std::cout << doc.dump(kJsonIndent) << "\n";
    } else {
        std::printf("wrote %d samples under %s\n", o.count, o.out_dir.c_str());
    }
    return 0;
}

int run_eval(const EvalOpts& o) {
    const cmfa::DatasetLayout layout = o.layout == "grip" ? cmfa::DatasetLayout::grip_style
                                                          : cmfa::DatasetLayout::synth_style;
    const cmfa::EvalMode mode = o.mode == "detected_mask" ? cmfa::EvalMode::detected_mask
                                                          : cmfa::EvalMode::ground_truth_mask;
    cmfa::EvalConfig cfg;
    cfg.discriminator.radii = o.radii;
    cfg.discriminator.neighbors = o.neighbors;
    cfg.discriminator.band_width = o.band_width;
    cfg.detector.block_size = o.block_size;
    cfg.detector.min_support = o.min_support;

    const std::vector<cmfa::DatasetEntry> entries = cmfa::ingest(o.root, layout);
    const cmfa::EvalReport report = cmfa::evaluate(entries, mode, cfg);
    if (o.json)
        std::cout << cmfa::report_to_json(report, kJsonIndent) << "\n";
    else
        std::cout << cmfa::report_to_table(report);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"copy-move forgery analysis: LBP maps, block-match detection,\n"
                 "original-vs-duplicate discrimination, forgery synthesis, evaluation"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "worker thread cap (0 = hardware default)");

    LbpOpts lbp_opts;
    auto* lbp = app.add_subcommand("lbp", "compute an LBP code map");
    lbp->add_option("--image", lbp_opts.image, "input image (PNG or PGM/PPM)")->required();
    lbp->add_option("--radius", lbp_opts.radius, "sampling radius R")->capture_default_str();
    lbp->add_option("--neighbors", lbp_opts.neighbors, "sample count P")->capture_default_str();
    lbp->add_option("--out", lbp_opts.out, "write the code map as a PNG (needs P <= 8)");
    lbp->add_flag("--json", lbp_opts.json, "JSON summary on stdout");

    DetectOpts detect_opts;
    auto* det = app.add_subcommand("detect", "block-matching copy-move detection");
    det->add_option("--image", detect_opts.image, "input image")->required();
    det->add_option("--out-mask", detect_opts.out_mask, "write the detection mask PNG");
    det->add_option("--block-size", detect_opts.block_size, "matching block side")
        ->capture_default_str();
    det->add_option("--min-support", detect_opts.min_support, "matches needed per shift")
        ->capture_default_str();
    det->add_flag("--json", detect_opts.json, "JSON result on stdout");

    DiscriminateOpts disc_opts;
    auto* disc = app.add_subcommand("discriminate", "name the duplicated region of a pair");
    disc->add_option("--image", disc_opts.image, "input image")->required();
    disc->add_option("--mask", disc_opts.mask, "binary mask with the two regions")->required();
    disc->add_option("--radii", disc_opts.radii, "LBP radii to vote over")
        ->delimiter(',')
        ->capture_default_str();
    disc->add_option("--neighbors", disc_opts.neighbors, "LBP sample count P")
        ->capture_default_str();
    disc->add_option("--band-width", disc_opts.band_width, "boundary band half-width")
        ->capture_default_str();
    disc->add_option("--overlay", disc_opts.overlay, "write a labeled overlay PNG");
    disc->add_flag("--json", disc_opts.json, "verdict JSON on stdout");

    SynthOpts synth_opts;
    auto* synth = app.add_subcommand("synth", "generate a ground-truthed forgery corpus");
    synth->add_option("--out-dir", synth_opts.out_dir, "corpus output directory")->required();
    synth->add_option("--count", synth_opts.count, "number of forgeries")->capture_default_str();
    synth->add_option("--seed", synth_opts.seed, "RNG seed")->capture_default_str();
    synth->add_option("--blend", synth_opts.blend, "pasted-contour treatment")
        ->check(CLI::IsMember({"none", "gaussian_feather"}))
        ->capture_default_str();
    synth->add_option("--sigma", synth_opts.sigma, "feather blur std")->capture_default_str();
    synth->add_option("--band", synth_opts.band, "feather band half-width")
        ->capture_default_str();
    synth->add_option("--bases", synth_opts.bases, "generated base textures")
        ->capture_default_str();
    synth->add_option("--base-width", synth_opts.base_width, "base texture width")
        ->capture_default_str();
    synth->add_option("--base-height", synth_opts.base_height, "base texture height")
        ->capture_default_str();
    synth->add_option("--base-period", synth_opts.base_period,
                      "texture tiling period (0 = aperiodic)")
        ->capture_default_str();
    synth->add_option("--base-noise", synth_opts.base_noise, "per-pixel noise amplitude")
        ->capture_default_str();
    synth->add_option("--shapes", synth_opts.shapes, "footprint shapes to sample")
        ->check(CLI::IsMember({"mixed", "rect", "ellipse"}))
        ->capture_default_str();
    synth->add_option("--min-area", synth_opts.min_area, "smallest footprint, pixels")
        ->capture_default_str();
    synth->add_option("--max-area", synth_opts.max_area, "largest footprint, pixels")
        ->capture_default_str();
    synth->add_option("--offset-step", synth_opts.offset_step,
                      "paste offset lattice step (0 = unrestricted)")
        ->capture_default_str();
    synth->add_flag("--json", synth_opts.json, "JSON summary on stdout");

    EvalOpts eval_opts;
    auto* eval = app.add_subcommand("eval", "score the discriminator over a dataset");
    eval->add_option("--root", eval_opts.root, "dataset root directory")->required();
    eval->add_option("--layout", eval_opts.layout, "dataset layout")
        ->check(CLI::IsMember({"synth", "grip"}))
        ->capture_default_str();
    eval->add_option("--mode", eval_opts.mode, "mask source")
        ->check(CLI::IsMember({"ground_truth_mask", "detected_mask"}))
        ->capture_default_str();
    eval->add_option("--radii", eval_opts.radii, "LBP radii to vote over")
        ->delimiter(',')
        ->capture_default_str();
    eval->add_option("--neighbors", eval_opts.neighbors, "LBP sample count P")
        ->capture_default_str();
    eval->add_option("--band-width", eval_opts.band_width, "boundary band half-width")
        ->capture_default_str();
    eval->add_option("--block-size", eval_opts.block_size, "detector block side")
        ->capture_default_str();
    eval->add_option("--min-support", eval_opts.min_support, "detector support threshold")
        ->capture_default_str();
    eval->add_flag("--json", eval_opts.json, "JSON report on stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help() << std::flush;
        return 1;
    }

    cmfa::set_max_threads(threads);
    try {
        if (lbp->parsed()) return run_lbp(lbp_opts);
        if (det->parsed()) return run_detect(detect_opts);
        if (disc->parsed()) return run_discriminate(disc_opts);
        if (synth->parsed()) return run_synth(synth_opts);
        if (eval->parsed()) return run_eval(eval_opts);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
