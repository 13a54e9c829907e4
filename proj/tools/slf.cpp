#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "slf/components.h"
#include "slf/dataset.h"
#include "slf/diffuse.h"
#include "slf/errors.h"
#include "slf/io.h"
#include "slf/optimizer.h"
#include "slf/parallel.h"
#include "slf/scene.h"
#include "slf/synth.h"

namespace fs = std::filesystem;
using namespace slf;

namespace {

bool g_verbose = false;

void say(const std::string& msg) {
    if (g_verbose) std::cout << msg << std::endl;
}

std::string frame_name(int id) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%05d", id);
    return buf;
}

std::vector<ObservedFrame> pick_frames(const Dataset& ds, const std::vector<int>& idx) {
    std::vector<ObservedFrame> out;
    out.reserve(idx.size());
    for (int i : idx) out.push_back({&ds.images[i], ds.cameras[i]});
    return out;
}

std::vector<int> pick_split(const Dataset& ds, const std::string& split) {
    if (split == "train") return ds.train;
    if (split == "test") return ds.test;
    if (split == "all") {
        std::vector<int> all(ds.frame_count());
        std::iota(all.begin(), all.end(), 0);
        return all;
    }
    throw UsageError("unknown split '" + split + "', expected train, test or all");
}

CompositeMode parse_mode(const std::string& mode) {
    if (mode == "plain") return CompositeMode::Plain;
    if (mode == "fresnel") return CompositeMode::Fresnel;
    throw UsageError("unknown composite mode '" + mode + "', expected plain or fresnel");
}

// ---- synth ----

struct SynthJob {
    SyntheticSceneSpec spec;
    std::vector<double> elevations; // one camera ring per entry
    int test_stride = 0;
};

SynthJob read_synth_job(const std::string& path) {
    Toml cfg = Toml::parse_file(path);
    const fs::path dir = fs::path(path).parent_path();

    SynthJob job;
    SyntheticSceneSpec& s = job.spec;
    s.source = parse_mesh_source(cfg.get_string("synth", "mesh", "sphere"));
    s.subdivisions = int(cfg.get_number("synth", "subdivisions", s.subdivisions));
    s.env = cfg.get_string("synth", "env", s.env);
    if (s.env != "studio" && s.env != "uniform" && s.env != "blobs" &&
        fs::path(s.env).is_relative())
        s.env = (dir / s.env).string();
    s.k_s = cfg.get_number("synth", "k_s", s.k_s);
    s.width = int(cfg.get_number("synth", "width", s.width));
    s.height = int(cfg.get_number("synth", "height", s.height));
    s.fov_deg = cfg.get_number("synth", "fov_deg", s.fov_deg);
    s.seed = uint64_t(cfg.get_number("synth", "seed", double(s.seed)));
    job.test_stride = int(cfg.get_number("synth", "test_stride", 0));

    s.rig.count = int(cfg.get_number("rig", "count", s.rig.count));
    s.rig.radius = cfg.get_number("rig", "radius", s.rig.radius);
    if (cfg.has("rig", "elevations"))
        job.elevations = cfg.get_array("rig", "elevations");
    else
        job.elevations = {cfg.get_number("rig", "elevation", s.rig.elevation)};
    if (job.elevations.empty()) throw DataError(path + ": [rig] elevations is empty");

    s.noise.sigma = cfg.get_number("noise", "sigma", 0.0);
    s.noise.scale = cfg.get_number("noise", "scale", 1.0);

    if (cfg.has("materials", "roughness")) {
        auto rough = cfg.get_array("materials", "roughness");
        auto r = cfg.get_array("materials", "albedo_r");
        auto g = cfg.get_array("materials", "albedo_g");
        auto b = cfg.get_array("materials", "albedo_b");
        if (r.size() != rough.size() || g.size() != rough.size() || b.size() != rough.size())
            throw MismatchError(path + ": [materials] arrays must have one entry per object");
        for (size_t i = 0; i < rough.size(); ++i)
            s.materials.push_back({rough[i], {r[i], g[i], b[i]}});
    } else {
        s.materials.assign(object_count(s.source), SurfaceMaterial{});
    }
    return job;
}

void run_synth(const std::string& spec_path, const std::string& out, const uint64_t* seed) {
    SynthJob job = read_synth_job(spec_path);
    if (seed) job.spec.seed = *seed;

    job.spec.rig.elevation = job.elevations[0];
    say("rendering ring at elevation " + std::to_string(job.elevations[0]));
    SyntheticData data = render_synthetic(job.spec);
    // Extra rings reuse the identical (same-seed) geometry; only cameras move.
    for (size_t e = 1; e < job.elevations.size(); ++e) {
        job.spec.rig.elevation = job.elevations[e];
        say("rendering ring at elevation " + std::to_string(job.elevations[e]));
        SyntheticData more = render_synthetic(job.spec);
        data.cameras.insert(data.cameras.end(), more.cameras.begin(), more.cameras.end());
        for (auto& f : more.frames) data.frames.push_back(std::move(f));
        for (auto& m : more.masks) data.masks.push_back(std::move(m));
    }

    write_dataset(out, data, job.test_stride);
    say("wrote " + std::to_string(data.frames.size()) + " frames to " + out);
}

// ---- estimate-diffuse ----

void run_estimate_diffuse(const std::string& scene_path, const std::string& out, int stride) {
    Dataset ds = load_dataset(scene_path, stride);
    if (ds.train.empty()) throw DataError("no training frames survive the split and stride");
    Scene scene = make_scene(std::move(ds.mesh));

    say("gathering observations from " + std::to_string(ds.train.size()) + " frames");
    VertexObservations obs = gather_observations(scene, pick_frames(ds, ds.train));
    size_t flagged = 0;
    for (unsigned char f : obs.low_confidence) flagged += f;
    if (flagged > 0)
        std::cerr << "warning: " << flagged << " of " << obs.per_vertex.size()
                  << " vertices have fewer than 3 observations\n";

    TriangleMesh painted = scene.mesh;
    painted.albedo = robust_min_irls(obs);

    fs::create_directories(out);
    write_ply((fs::path(out) / "albedo.ply").string(), painted, /*float_colors=*/false);
    write_u32((fs::path(out) / "confidence.bin").string(), obs.counts());
    say("wrote albedo.ply and confidence.bin to " + out);
}

// ---- estimate-srm ----

struct SrmArgs {
    std::string scene;
    std::string frames;
    std::string mesh;
    std::string out;
    int m = 2;
    int srm_size = 64;
    int epochs = 40;
    int batch = 4;
    double lr_srm = 1e-3;
    double lr_logits = 1e-2;
    double lambda_s = 1e-4;
    double lambda_w = 1e-3;
    double logit_noise = 0.0;
    uint64_t seed = 1;
    int stride = 10;
};

void run_estimate_srm(const SrmArgs& a, const uint64_t* seed) {
    Dataset ds = load_dataset(a.scene, a.stride, a.frames);
    if (ds.train.empty()) throw DataError("no training frames survive the split and stride");

    TriangleMesh mesh = std::move(ds.mesh);
    if (!a.mesh.empty()) {
        mesh = read_ply(a.mesh);
        if (mesh.normals.empty()) mesh.compute_vertex_normals();
        mesh.validate();
    }
    if (mesh.albedo.empty())
        throw DataError("the mesh carries no vertex colors; run estimate-diffuse and pass "
                        "--mesh, or bake colors into the scene mesh");
    Scene scene = make_scene(std::move(mesh));

    OptimizerConfig cfg;
    cfg.basis_count = a.m;
    cfg.srm_width = a.srm_size;
    cfg.srm_height = a.srm_size / 2;
    cfg.epochs = a.epochs;
    cfg.batch = a.batch;
    cfg.lr_srm = a.lr_srm;
    cfg.lr_logits = a.lr_logits;
    cfg.lambda_sparsity = a.lambda_s;
    cfg.lambda_smoothness = a.lambda_w;
    cfg.logit_noise = a.logit_noise;
    cfg.seed = seed ? *seed : a.seed;

    say("fitting " + std::to_string(cfg.basis_count) + " maps from " +
        std::to_string(ds.train.size()) + " frames");
    FitResult fit = fit_basis_maps(scene, pick_frames(ds, ds.train), cfg);

    fs::create_directories(a.out);
    const fs::path out(a.out);
    for (size_t i = 0; i < fit.state.srms.size(); ++i)
        write_pfm((out / ("srm_" + std::to_string(i) + ".pfm")).string(), fit.state.srms[i]);

    std::vector<float> logits(fit.state.logits.begin(), fit.state.logits.end());
    write_floats((out / "logits.bin").string(), logits);

    std::ofstream csv((out / "loss.csv").string());
    if (!csv) throw DataError("cannot open " + (out / "loss.csv").string() + " for writing");
    csv << std::setprecision(9) << "epoch,data,sparsity,smoothness\n";
    for (size_t e = 0; e < fit.curve.size(); ++e)
        csv << e << "," << fit.curve[e].data << "," << fit.curve[e].sparsity << ","
            << fit.curve[e].smoothness << "\n";
    if (!csv) throw DataError("write failed: " + (out / "loss.csv").string());

    ImageF mask(fit.observed.width, fit.observed.height);
    for (size_t i = 0; i < mask.data.size(); ++i) mask.data[i] = fit.observed.data[i] ? 1.0 : 0.0;
    write_pfm_gray((out / "mask.pfm").string(), mask);

    if (!fit.curve.empty())
        say("final loss " + std::to_string(fit.curve.back().total()) + " after " +
            std::to_string(fit.curve.size()) + " epochs");
}

// ---- render / eval / components ----

std::vector<Panorama> load_srms(const std::string& run) {
    std::vector<Panorama> srms;
    while (true) {
        fs::path p = fs::path(run) / ("srm_" + std::to_string(srms.size()) + ".pfm");
        if (!fs::exists(p)) break;
        srms.push_back(read_pfm(p.string()));
        check_panorama(srms.back());
    }
    if (srms.empty()) throw FileNotFoundError("no srm_0.pfm under " + run);
    return srms;
}

void apply_logits(TriangleMesh& mesh, const std::string& run, size_t m) {
    std::vector<float> f = read_floats((fs::path(run) / "logits.bin").string());
    if (f.size() != mesh.vertex_count() * m)
        throw MismatchError(run + "/logits.bin holds " + std::to_string(f.size()) +
                            " values, expected " + std::to_string(mesh.vertex_count()) + " x " +
                            std::to_string(m));
    mesh.logits.assign(f.begin(), f.end());
    mesh.num_materials = int(m);
}

void run_render(const std::string& scene_path, const std::string& run, const std::string& out,
                const std::string& mode, double r0, const std::string& split, int stride) {
    CompositeMode cm = parse_mode(mode);
    Dataset ds = load_dataset(scene_path, stride);
    std::vector<Panorama> srms = load_srms(run);
    apply_logits(ds.mesh, run, srms.size());
    Scene scene = make_scene(std::move(ds.mesh));

    std::vector<int> idx = pick_split(ds, split);
    if (idx.empty()) throw DataError("the '" + split + "' split is empty");

    fs::create_directories(out);
    for (int i : idx) {
        RenderComponents comp = render_components(scene, srms, ds.cameras[i]);
        ImageRgb img = composite(comp, cm, r0);
        const std::string stem = (fs::path(out) / frame_name(ds.frame_ids[i])).string();
        write_pfm(stem + ".pfm", img);
        write_png(stem + ".png", img);
        say("rendered frame " + std::to_string(ds.frame_ids[i]));
    }
}

void run_eval(const std::string& scene_path, const std::string& run, const std::string& out,
              const std::string& mode, double r0, int stride) {
    CompositeMode cm = parse_mode(mode);
    Dataset ds = load_dataset(scene_path, stride);
    if (ds.test.empty())
        throw DataError("the dataset has no test frames; add a test section to the split file");
    std::vector<Panorama> srms = load_srms(run);
    apply_logits(ds.mesh, run, srms.size());
    Scene scene = make_scene(std::move(ds.mesh));

    std::vector<ImageRgb> rendered, reference;
    std::vector<ImageMask> masks;
    std::vector<Camera> cameras;
    std::vector<int> ids;
    for (int i : ds.test) {
        RenderComponents comp = render_components(scene, srms, ds.cameras[i]);
        rendered.push_back(composite(comp, cm, r0));
        masks.push_back(std::move(comp.coverage));
        reference.push_back(ds.images[i]);
        cameras.push_back(ds.cameras[i]);
        ids.push_back(ds.frame_ids[i]);
        say("evaluated frame " + std::to_string(ds.frame_ids[i]));
    }
    std::vector<Camera> train_cameras;
    for (int i : ds.train) train_cameras.push_back(ds.cameras[i]);

    MetricsReport report = evaluate(rendered, reference, masks, cameras, train_cameras,
                                    scene.mesh.bounds().center(), &ids);
    fs::create_directories(out);
    write_metrics_csv((fs::path(out) / "metrics.csv").string(), report);
    std::cout << "mean l1 " << report.mean_l1 << ", mean psnr " << report.mean_psnr << " over "
              << report.frames.size() << " test frames\n";
}

ImageRgb gray_to_rgb(const ImageF& g) {
    ImageRgb out(g.width, g.height);
    for (size_t i = 0; i < g.data.size(); ++i)
        out.data[i] = {g.data[i], g.data[i], g.data[i]};
    return out;
}

void run_components(const std::string& scene_path, const std::string& run,
                    const std::string& out, const std::string& split, int stride) {
    Dataset ds = load_dataset(scene_path, stride);
    std::vector<Panorama> srms = load_srms(run);
    apply_logits(ds.mesh, run, srms.size());
    Scene scene = make_scene(std::move(ds.mesh));

    std::vector<int> idx = pick_split(ds, split);
    if (idx.empty()) throw DataError("the '" + split + "' split is empty");

    fs::create_directories(out);
    for (int i : idx) {
        RenderComponents c = render_components(scene, srms, ds.cameras[i]);
        const std::string stem = (fs::path(out) / frame_name(ds.frame_ids[i])).string();
        write_pfm(stem + "_D.pfm", c.diffuse);
        write_pfm(stem + "_S.pfm", c.specular);
        write_pfm(stem + "_R.pfm", c.reflection);
        write_pfm_gray(stem + "_V.pfm", c.visibility);
        write_pfm(stem + "_FBI.pfm", c.first_bounce);
        write_pfm_gray(stem + "_FCI.pfm", c.fresnel);

        write_png(stem + "_D.png", c.diffuse);
        write_png(stem + "_S.png", c.specular);
        ImageRgb refl = c.reflection; // directions remapped from [-1,1] for preview
        for (Rgb& v : refl.data) v = (v + Rgb{1, 1, 1}) * 0.5;
        write_png(stem + "_R.png", refl);
        write_png(stem + "_V.png", gray_to_rgb(c.visibility));
        write_png(stem + "_FBI.png", c.first_bounce);
        write_png(stem + "_FCI.png", gray_to_rgb(c.fresnel));
        say("dumped components for frame " + std::to_string(ds.frame_ids[i]));
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"surface light field pipeline: synthesize captures, estimate diffuse "
                 "textures and specular reflectance maps, render and evaluate"};
    app.require_subcommand(1);

    int threads = 0;
    uint64_t seed = 0;
    app.add_option("--threads", threads, "worker threads, 0 uses every core")
        ->capture_default_str();
    CLI::Option* seed_opt = app.add_option("--seed", seed, "override the configured RNG seed");
    app.add_flag("--verbose", g_verbose, "print progress");

    auto* synth = app.add_subcommand("synth", "render a synthetic capture with ground truth");
    std::string synth_spec, synth_out;
    synth->add_option("--spec", synth_spec, "scene description TOML")->required();
    synth->add_option("--out", synth_out, "dataset directory to create")->required();

    auto* ediff = app.add_subcommand("estimate-diffuse",
                                     "recover per-vertex diffuse color from a capture");
    std::string ed_scene, ed_out;
    int ed_stride = 10;
    ediff->add_option("--scene", ed_scene, "scene descriptor TOML")->required();
    ediff->add_option("--out", ed_out, "output directory")->required();
    ediff->add_option("--stride", ed_stride, "keep every Nth frame of each split")
        ->capture_default_str();

    auto* esrm = app.add_subcommand("estimate-srm",
                                    "fit specular reflectance maps and blend weights");
    SrmArgs sa;
    esrm->add_option("--scene", sa.scene, "scene descriptor TOML")->required();
    esrm->add_option("--frames", sa.frames, "override the frames directory");
    esrm->add_option("--mesh", sa.mesh, "replace the scene mesh (e.g. estimated albedo.ply)");
    esrm->add_option("--out", sa.out, "output directory")->required();
    esrm->add_option("--m", sa.m, "number of reflectance maps")->capture_default_str();
    esrm->add_option("--srm-size", sa.srm_size, "map width in texels, height is half")
        ->capture_default_str();
    esrm->add_option("--epochs", sa.epochs, "passes over the training frames")
        ->capture_default_str();
    esrm->add_option("--batch", sa.batch, "frames per optimizer step")->capture_default_str();
    esrm->add_option("--lr-srm", sa.lr_srm, "map learning rate")->capture_default_str();
    esrm->add_option("--lr-logits", sa.lr_logits, "blend logit learning rate")
        ->capture_default_str();
    esrm->add_option("--lambda-s", sa.lambda_s, "specular sparsity weight")
        ->capture_default_str();
    esrm->add_option("--lambda-w", sa.lambda_w, "weight smoothness strength")
        ->capture_default_str();
    esrm->add_option("--logit-noise", sa.logit_noise,
                     "std of the initial logit jitter that breaks basis symmetry")
        ->capture_default_str();
    esrm->add_option("--stride", sa.stride, "keep every Nth frame of each split")
        ->capture_default_str();

    auto* render = app.add_subcommand("render", "composite fitted maps into images");
    std::string r_scene, r_run, r_out, r_mode = "plain", r_split = "all";
    double r_r0 = 0.04;
    int r_stride = 10;
    render->add_option("--scene", r_scene, "scene descriptor TOML")->required();
    render->add_option("--run", r_run, "directory with srm_*.pfm and logits.bin")->required();
    render->add_option("--out", r_out, "output directory")->required();
    render->add_option("--mode", r_mode, "plain or fresnel")->capture_default_str();
    render->add_option("--r0", r_r0, "normal-incidence reflectance for fresnel mode")
        ->capture_default_str();
    render->add_option("--split", r_split, "train, test or all")->capture_default_str();
    render->add_option("--stride", r_stride, "keep every Nth frame of each split")
        ->capture_default_str();

    auto* eval = app.add_subcommand("eval", "compare renders against held-out test frames");
    std::string e_scene, e_run, e_out, e_mode = "plain";
    double e_r0 = 0.04;
    int e_stride = 10;
    eval->add_option("--scene", e_scene, "scene descriptor TOML")->required();
    eval->add_option("--run", e_run, "directory with srm_*.pfm and logits.bin")->required();
    eval->add_option("--out", e_out, "output directory for metrics.csv")->required();
    eval->add_option("--mode", e_mode, "plain or fresnel")->capture_default_str();
    eval->add_option("--r0", e_r0, "normal-incidence reflectance for fresnel mode")
        ->capture_default_str();
    eval->add_option("--stride", e_stride, "keep every Nth frame of each split")
        ->capture_default_str();

    auto* comps = app.add_subcommand("components", "dump per-frame model component images");
    std::string c_scene, c_run, c_out, c_split = "all";
    int c_stride = 10;
    comps->add_option("--scene", c_scene, "scene descriptor TOML")->required();
    comps->add_option("--run", c_run, "directory with srm_*.pfm and logits.bin")->required();
    comps->add_option("--out", c_out, "output directory")->required();
    comps->add_option("--split", c_split, "train, test or all")->capture_default_str();
    comps->add_option("--stride", c_stride, "keep every Nth frame of each split")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        set_thread_count(threads);
        const uint64_t* seed_ptr = seed_opt->count() > 0 ? &seed : nullptr;
        if (*synth) run_synth(synth_spec, synth_out, seed_ptr);
        if (*ediff) run_estimate_diffuse(ed_scene, ed_out, ed_stride);
        if (*esrm) run_estimate_srm(sa, seed_ptr);
        if (*render) run_render(r_scene, r_run, r_out, r_mode, r_r0, r_split, r_stride);
        if (*eval) run_eval(e_scene, e_run, e_out, e_mode, e_r0, e_stride);
        if (*comps) run_components(c_scene, c_run, c_out, c_split, c_stride);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
