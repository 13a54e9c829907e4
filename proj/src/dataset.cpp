#include "slf/dataset.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "slf/errors.h"
#include "slf/io.h"
#include "slf/parallel.h"
#include "slf/synth.h"

namespace slf {

namespace fs = std::filesystem;

namespace {

std::string frame_stem(int id) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%05d", id);
    return buf;
}

std::string resolve(const fs::path& base_dir, const std::string& p) {
    fs::path q(p);
    return q.is_absolute() ? q.string() : (base_dir / q).string();
}

struct SplitFile {
    std::vector<int> train;
    std::vector<int> test;
};

// "train" and "test" header lines, one frame id per line below each.
SplitFile read_split(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileNotFoundError("cannot open " + path);
    SplitFile split;
    std::vector<int>* target = nullptr;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        size_t b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        size_t e = line.find_last_not_of(" \t\r");
        std::string tok = line.substr(b, e - b + 1);
        if (tok == "train") {
            target = &split.train;
            continue;
        }
        if (tok == "test") {
            target = &split.test;
            continue;
        }
        const std::string where = path + ":" + std::to_string(line_no);
        if (!target) throw ParseError(where + ": frame id before a train/test header");
        int id = -1;
        try {
            size_t used = 0;
            id = std::stoi(tok, &used);
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw ParseError(where + ": expected a frame id, got '" + tok + "'");
        }
        if (id < 0) throw ParseError(where + ": negative frame id");
        target->push_back(id);
    }
    return split;
}

std::vector<int> strided(const std::vector<int>& ids, int stride) {
    std::vector<int> out;
    out.reserve((ids.size() + stride - 1) / stride);
    for (size_t i = 0; i < ids.size(); i += size_t(stride)) out.push_back(ids[i]);
    return out;
}

void check_ids(const std::vector<int>& ids, size_t pose_count, const std::string& which,
               const std::string& where) {
    std::vector<int> sorted = ids;
    std::sort(sorted.begin(), sorted.end());
    auto dup = std::adjacent_find(sorted.begin(), sorted.end());
    if (dup != sorted.end())
        throw MismatchError(where + ": frame " + std::to_string(*dup) + " listed twice under " +
                            which);
    if (!sorted.empty() && sorted.back() >= int(pose_count))
        throw MismatchError(where + ": " + which + " frame " + std::to_string(sorted.back()) +
                            " exceeds the " + std::to_string(pose_count) + " trajectory poses");
}

} // namespace

Dataset load_dataset(const std::string& scene_toml, int stride, const std::string& frames_dir_arg) {
    if (stride < 1) throw std::invalid_argument("stride must be >= 1");
    Toml cfg = Toml::parse_file(scene_toml);
    const fs::path dir = fs::path(scene_toml).parent_path();

    Dataset ds;
    const std::string mesh_path = resolve(dir, cfg.get_string("scene", "mesh"));
    ds.mesh = read_ply(mesh_path);
    if (ds.mesh.faces.empty()) throw MeshFormatError(mesh_path + ": mesh has no faces");
    if (ds.mesh.normals.empty()) ds.mesh.compute_vertex_normals();
    ds.mesh.validate();

    ds.intrinsics = read_intrinsics(resolve(dir, cfg.get_string("scene", "intrinsics")));

    const std::string traj_path = resolve(dir, cfg.get_string("scene", "trajectory"));
    const auto traj = read_trajectory(traj_path);
    if (traj.empty()) throw DataError(traj_path + ": no camera poses");

    // Every pose needs an image on disk even when the split drops it; a hole
    // usually means the capture is misnumbered.
    const fs::path frames_dir = frames_dir_arg.empty()
                                    ? fs::path(resolve(dir, cfg.get_string("scene", "frames")))
                                    : fs::path(frames_dir_arg);
    std::vector<std::string> image_paths(traj.size());
    for (size_t k = 0; k < traj.size(); ++k) {
        fs::path pfm = frames_dir / (frame_stem(int(k)) + ".pfm");
        fs::path png = frames_dir / (frame_stem(int(k)) + ".png");
        if (fs::exists(pfm))
            image_paths[k] = pfm.string();
        else if (fs::exists(png))
            image_paths[k] = png.string();
        else
            throw FileNotFoundError("no image for pose " + std::to_string(k) + " under " +
                                    frames_dir.string());
    }

    std::vector<int> train_ids;
    std::vector<int> test_ids;
    if (cfg.has("scene", "split")) {
        const std::string split_path = resolve(dir, cfg.get_string("scene", "split"));
        SplitFile split = read_split(split_path);
        check_ids(split.train, traj.size(), "train", split_path);
        check_ids(split.test, traj.size(), "test", split_path);
        for (int id : split.test)
            if (std::find(split.train.begin(), split.train.end(), id) != split.train.end())
                throw MismatchError(split_path + ": frame " + std::to_string(id) +
                                    " appears in both train and test");
        train_ids = std::move(split.train);
        test_ids = std::move(split.test);
    } else {
        train_ids.resize(traj.size());
        std::iota(train_ids.begin(), train_ids.end(), 0);
    }
    train_ids = strided(train_ids, stride);
    test_ids = strided(test_ids, stride);

    // Frames are stored in ascending id order regardless of list order.
    std::vector<int> kept = train_ids;
    kept.insert(kept.end(), test_ids.begin(), test_ids.end());
    std::sort(kept.begin(), kept.end());
    std::unordered_map<int, int> index;
    for (size_t i = 0; i < kept.size(); ++i) index[kept[i]] = int(i);

    ds.frame_ids = kept;
    ds.timestamps.reserve(kept.size());
    ds.cameras.reserve(kept.size());
    for (int id : kept) {
        ds.timestamps.push_back(traj[id].timestamp);
        Camera cam;
        cam.intr = ds.intrinsics;
        cam.rotation = traj[id].rotation;
        cam.position = traj[id].translation;
        ds.cameras.push_back(cam);
    }
    for (int id : train_ids) ds.train.push_back(index.at(id));
    for (int id : test_ids) ds.test.push_back(index.at(id));

    // Decode in parallel; worker exceptions are replayed in frame order so
    // the reported failure does not depend on the thread count.
    ds.images.resize(kept.size());
    std::vector<std::exception_ptr> errors(kept.size());
    parallel_for(int64_t(kept.size()), [&](int64_t i) {
        try {
            const std::string& p = image_paths[kept[i]];
            ds.images[i] = p.size() > 4 && p.compare(p.size() - 4, 4, ".pfm") == 0
                               ? read_pfm(p)
                               : read_png(p);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    });
    for (const auto& err : errors)
        if (err) std::rethrow_exception(err);
    for (size_t i = 0; i < kept.size(); ++i) {
        const ImageRgb& img = ds.images[i];
        if (img.width != ds.intrinsics.width || img.height != ds.intrinsics.height)
            throw MismatchError(image_paths[kept[i]] + ": image is " +
                                std::to_string(img.width) + "x" + std::to_string(img.height) +
                                " but the intrinsics say " +
                                std::to_string(ds.intrinsics.width) + "x" +
                                std::to_string(ds.intrinsics.height));
    }
    return ds;
}

void write_dataset(const std::string& dir, const SyntheticData& data, int test_stride) {
    if (data.cameras.empty() || data.frames.size() != data.cameras.size())
        throw DataError("synthetic capture has no frames to write");
    if (test_stride < 0) throw std::invalid_argument("test_stride must be >= 0");
    const fs::path root(dir);
    fs::create_directories(root / "frames");

    write_ply((root / "mesh.ply").string(), data.mesh, true);
    write_ply((root / "gt_albedo.ply").string(), data.render_mesh, true);
    write_intrinsics((root / "intrinsics.toml").string(), data.cameras[0].intr);

    std::vector<TrajectoryEntry> traj(data.cameras.size());
    for (size_t k = 0; k < data.cameras.size(); ++k) {
        traj[k].timestamp = double(k);
        traj[k].translation = data.cameras[k].position;
        traj[k].rotation = data.cameras[k].rotation;
    }
    write_trajectory((root / "trajectory.txt").string(), traj);

    parallel_for(int64_t(data.frames.size()), [&](int64_t k) {
        const fs::path stem = root / "frames" / frame_stem(int(k));
        write_pfm(stem.string() + ".pfm", data.frames[k]);
        write_png(stem.string() + ".png", data.frames[k]);
    });

    for (size_t i = 0; i < data.gt_srms.size(); ++i)
        write_pfm((root / ("gt_srm_" + std::to_string(i) + ".pfm")).string(), data.gt_srms[i]);
    write_pfm((root / "gt_env.pfm").string(), data.env);

    std::ofstream split((root / "split.txt").string());
    split << "train\n";
    for (size_t k = 0; k < data.frames.size(); ++k)
        if (test_stride == 0 || int(k) % test_stride != test_stride - 1) split << k << "\n";
    split << "test\n";
    if (test_stride > 0)
        for (size_t k = 0; k < data.frames.size(); ++k)
            if (int(k) % test_stride == test_stride - 1) split << k << "\n";
    if (!split) throw DataError("write failed: " + (root / "split.txt").string());

    std::ofstream scene((root / "scene.toml").string());
    scene << "[scene]\n"
          << "mesh = \"mesh.ply\"\n"
          << "intrinsics = \"intrinsics.toml\"\n"
          << "trajectory = \"trajectory.txt\"\n"
          << "frames = \"frames\"\n"
          << "split = \"split.txt\"\n";
    if (!scene) throw DataError("write failed: " + (root / "scene.toml").string());
}

FrameMetrics frame_metrics(const ImageRgb& rendered, const ImageRgb& reference,
                           const ImageMask& mask, const Camera& camera,
                           const std::vector<Camera>& train_cameras, Vec3 center) {
    if (rendered.width != reference.width || rendered.height != reference.height ||
        rendered.width != mask.width || rendered.height != mask.height)
        throw MismatchError("metric inputs disagree on image size");

    double sum_abs = 0;
    double sum_sq = 0;
    size_t n = 0;
    for (size_t i = 0; i < rendered.data.size(); ++i) {
        if (!mask.data[i]) continue;
        ++n;
        for (int c = 0; c < 3; ++c) {
            double d = rendered.data[i][c] - reference.data[i][c];
            sum_abs += std::abs(d);
            sum_sq += d * d;
        }
    }

    FrameMetrics m;
    m.pixels = n;
    if (n > 0) {
        m.l1 = sum_abs / double(3 * n);
        double mse = sum_sq / double(3 * n);
        m.l2 = std::sqrt(mse);
        m.psnr = mse > 0 ? -10.0 * std::log10(mse) : std::numeric_limits<double>::infinity();
    } else {
        m.psnr = std::numeric_limits<double>::infinity();
    }

    m.view_angle_deg = std::numeric_limits<double>::quiet_NaN();
    Vec3 d0 = center - camera.position;
    double len0 = length(d0);
    if (!train_cameras.empty() && len0 > 0) {
        d0 = d0 * (1.0 / len0);
        double best = M_PI;
        for (const Camera& t : train_cameras) {
            Vec3 d1 = t.position - center;
            double len1 = length(d1);
            if (len1 <= 0) continue;
            double c = clamp(dot(d0, d1 * (-1.0 / len1)), -1.0, 1.0);
            best = std::min(best, std::acos(c));
        }
        m.view_angle_deg = best * 180.0 / M_PI;
    }
    return m;
}

MetricsReport evaluate(const std::vector<ImageRgb>& rendered,
                       const std::vector<ImageRgb>& reference,
                       const std::vector<ImageMask>& masks,
                       const std::vector<Camera>& cameras,
                       const std::vector<Camera>& train_cameras, Vec3 center,
                       const std::vector<int>* frame_ids) {
    if (rendered.size() != reference.size() || rendered.size() != masks.size() ||
        rendered.size() != cameras.size() || (frame_ids && frame_ids->size() != rendered.size()))
        throw MismatchError("evaluate needs the same number of frames in every input");

    MetricsReport report;
    report.frames.resize(rendered.size());
    for (size_t k = 0; k < rendered.size(); ++k) {
        report.frames[k] =
            frame_metrics(rendered[k], reference[k], masks[k], cameras[k], train_cameras, center);
        report.frames[k].frame_id = frame_ids ? (*frame_ids)[k] : int(k);
    }
    for (const FrameMetrics& m : report.frames) {
        report.mean_l1 += m.l1;
        report.mean_l2 += m.l2;
        report.mean_psnr += m.psnr;
    }
    if (!report.frames.empty()) {
        report.mean_l1 /= double(report.frames.size());
        report.mean_l2 /= double(report.frames.size());
        report.mean_psnr /= double(report.frames.size());
    }
    return report;
}

void write_metrics_csv(const std::string& path, const MetricsReport& report) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path + " for writing");
    out << std::setprecision(9);
    out << "frame,l1,l2,psnr,view_angle_deg,pixels\n";
    for (const FrameMetrics& m : report.frames)
        out << m.frame_id << "," << m.l1 << "," << m.l2 << "," << m.psnr << ","
            << m.view_angle_deg << "," << m.pixels << "\n";
    out << "mean," << report.mean_l1 << "," << report.mean_l2 << "," << report.mean_psnr
        << ",,\n";
    if (!out) throw DataError("write failed: " + path);
}

} // namespace slf
