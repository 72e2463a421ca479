#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cadre/binio.hpp"
#include "cadre/labels.hpp"
#include "cadre/rng.hpp"
#include "cadre/tensor.hpp"

// Clip dataset construction: per-frame annotation streams collapsed to clip
// labels by frame majority, frame-level image ops (bilinear resize, Gaussian
// blur, horizontal flip), label-preserving augmentation, a procedural clip
// generator, the on-disk dataset container, and a PGM frame-folder importer.
//
// All pixel data is grayscale in [0,1]; clips are [1, 5, H, W].

namespace cadre {

struct LabeledClip {
    Tensor clip;  // [1, 5, H, W]
    ClipLabels labels;
};

struct Dataset {
    std::vector<LabeledClip> clips;
    std::string provenance;  // in-memory note only (seed or source path)
};

/// Five frames plus the five per-frame annotation streams they arrived with.
struct FrameSequence {
    Tensor frames;  // [5, H, W]
    std::vector<int> glasses, head, mouth, eye, drowsy;  // one value per frame
};

/// Collapses the sequence's annotation streams to clip labels via the frame
/// majority rule and packs the frames into a clip. The scenario tag is the
/// clip-level glasses/illumination condition.
inline LabeledClip seal_clip(const FrameSequence& seq) {
    if (seq.frames.shape().rank() != 3 || seq.frames.shape()[0] != kFramesPerClip)
        throw ShapeError("seal_clip: frames must be [5,H,W], got " + seq.frames.shape().str());
    LabeledClip out;
    out.labels.glasses = clip_label_from_frames(seq.glasses);
    out.labels.head = clip_label_from_frames(seq.head);
    out.labels.mouth = clip_label_from_frames(seq.mouth);
    out.labels.eye = clip_label_from_frames(seq.eye);
    out.labels.drowsy = clip_label_from_frames(seq.drowsy);
    out.labels.scenario = out.labels.glasses;
    check_clip_labels(out.labels);
    out.clip = reshape(seq.frames, Shape{1, kFramesPerClip, seq.frames.shape()[1],
                                         seq.frames.shape()[2]});
    return out;
}

// ---------------------------------------------------------------------------
// Frame-level image operations

inline double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

/// Corner-aligned bilinear resampling of one [H,W] frame. Results are
/// clamped to [0,1]; resizing to the identical extents reproduces the input
/// bit for bit.
inline Tensor resize_bilinear(const Tensor& frame, int out_h, int out_w) {
    if (frame.shape().rank() != 2)
        throw ShapeError("resize_bilinear: frame must be rank-2, got " + frame.shape().str());
    const int h = frame.shape()[0], w = frame.shape()[1];
    if (h < 2 || w < 2 || out_h < 2 || out_w < 2)
        throw ShapeError("resize_bilinear: extents must be at least 2, got " +
                         frame.shape().str() + " -> [" + std::to_string(out_h) + "," +
                         std::to_string(out_w) + "]");
    Tensor out(Shape{out_h, out_w});
    const double sy = static_cast<double>(h - 1) / (out_h - 1);
    const double sx = static_cast<double>(w - 1) / (out_w - 1);
    for (int i = 0; i < out_h; ++i) {
        const double fy = i * sy;
        const int y0 = static_cast<int>(fy);
        const int y1 = std::min(y0 + 1, h - 1);
        const double dy = fy - y0;
        for (int j = 0; j < out_w; ++j) {
            const double fx = j * sx;
            const int x0 = static_cast<int>(fx);
            const int x1 = std::min(x0 + 1, w - 1);
            const double dx = fx - x0;
            const double top = (1.0 - dx) * frame.at(y0, x0) + dx * frame.at(y0, x1);
            const double bot = (1.0 - dx) * frame.at(y1, x0) + dx * frame.at(y1, x1);
            out.at(i, j) = clamp01((1.0 - dy) * top + dy * bot);
        }
    }
    return out;
}

/// Separable Gaussian blur, kernel radius ceil(3*sigma), weights normalized
/// to sum 1, edges handled by index clamping. Preserves constant frames (up
/// to rounding) and keeps values in [0,1].
inline Tensor gaussian_filter(const Tensor& frame, double sigma) {
    if (frame.shape().rank() != 2)
        throw ShapeError("gaussian_filter: frame must be rank-2, got " + frame.shape().str());
    if (!(sigma > 0.0))
        throw std::invalid_argument("gaussian_filter: sigma must be positive, got " +
                                    std::to_string(sigma));
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        const double v = std::exp(-(static_cast<double>(i) * i) / (2.0 * sigma * sigma));
        kernel[static_cast<std::size_t>(i + radius)] = v;
        sum += v;
    }
    for (double& v : kernel) v /= sum;

    const int h = frame.shape()[0], w = frame.shape()[1];
    Tensor tmp(frame.shape());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) {
                const int xi = std::clamp(x + i, 0, w - 1);
                acc += kernel[static_cast<std::size_t>(i + radius)] * frame.at(y, xi);
            }
            tmp.at(y, x) = acc;
        }
    Tensor out(frame.shape());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) {
                const int yi = std::clamp(y + i, 0, h - 1);
                acc += kernel[static_cast<std::size_t>(i + radius)] * tmp.at(yi, x);
            }
            out.at(y, x) = clamp01(acc);
        }
    return out;
}

/// Mirrors every frame of a clip left-right. An involution: applying it
/// twice restores the clip bit for bit.
inline Tensor hflip_clip(const Tensor& clip) {
    if (clip.shape().rank() != 4)
        throw ShapeError("hflip_clip: clip must be [C,T,H,W], got " + clip.shape().str());
    const int c = clip.shape()[0], t = clip.shape()[1], h = clip.shape()[2],
              w = clip.shape()[3];
    Tensor out(clip.shape());
    for (int ci = 0; ci < c; ++ci)
        for (int ti = 0; ti < t; ++ti)
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x)
                    out.at(ci, ti, y, x) = clip.at(ci, ti, y, w - 1 - x);
    return out;
}

/// Blurs every frame of a clip with one sigma.
inline Tensor blur_clip(const Tensor& clip, double sigma) {
    if (clip.shape().rank() != 4)
        throw ShapeError("blur_clip: clip must be [C,T,H,W], got " + clip.shape().str());
    const int c = clip.shape()[0], t = clip.shape()[1], h = clip.shape()[2],
              w = clip.shape()[3];
    Tensor out(clip.shape());
    for (int ci = 0; ci < c; ++ci)
        for (int ti = 0; ti < t; ++ti) {
            Tensor frame(Shape{h, w});
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x) frame.at(y, x) = clip.at(ci, ti, y, x);
            Tensor blurred = gaussian_filter(frame, sigma);
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x) out.at(ci, ti, y, x) = blurred.at(y, x);
        }
    return out;
}

/// Label-preserving expansion of one clip: {original, horizontal flip} x
/// {unfiltered, blur at each sigma} — 8 clips with the default three sigmas.
/// Output order: all variants of the original first, then of the flip.
inline std::vector<LabeledClip> augment(const LabeledClip& in,
                                        const std::vector<double>& sigmas = {0.5, 1.0, 2.0}) {
    std::vector<LabeledClip> out;
    out.reserve(2 * (1 + sigmas.size()));
    auto push_variants = [&](const Tensor& base) {
        out.push_back({base, in.labels});
        for (double sigma : sigmas) out.push_back({blur_clip(base, sigma), in.labels});
    };
    push_variants(in.clip);
    push_variants(hflip_clip(in.clip));
    return out;
}

// ---------------------------------------------------------------------------
// Procedural clip generator
//
// A stand-in for recorded driver video: each annotation category has a
// distinct, learnable visual signature rendered into small grayscale frames.
//   - illumination: day scenes sit on a bright base, night scenes on a dark
//     one (linearly separable from mean luminance alone);
//   - glasses / sunglasses: a semi-transparent darkening band across the eye
//     line, thicker and darker for sunglasses;
//   - head: the whole face drifts horizontally ("looking at both sides") or
//     vertically ("nodding") across the five frames;
//   - mouth: talking alternates a small/large bright blob, yawning grows a
//     dark opening frame by frame;
//   - eye: open eyes are two large bright blobs, sleepy eyes small dim ones.
// Drowsiness is tied to the sleepy-eye state, with nodding and yawning drawn
// preferentially for drowsy clips, so the detection target is recoverable
// from pixels but only through the same cues the condition heads see.

struct SynthConfig {
    int height = 32;
    int width = 32;
};

namespace synth_detail {

inline bool is_day(int glasses_class) {
    return glasses_class == 0 || glasses_class == 1 || glasses_class == 4;
}

inline void add_blob(Tensor& frame, double cy, double cx, double radius, double amp) {
    const int h = frame.shape()[0], w = frame.shape()[1];
    const double r2 = radius * radius;
    for (int y = 0; y < h; ++y) {
        const double py = (y + 0.5) / h;
        for (int x = 0; x < w; ++x) {
            const double px = (x + 0.5) / w;
            const double d2 = (py - cy) * (py - cy) + (px - cx) * (px - cx);
            if (d2 < r2) frame.at(y, x) += amp * (1.0 - d2 / r2);
        }
    }
}

inline void multiply_band(Tensor& frame, double cy, double half_height, double factor) {
    const int h = frame.shape()[0], w = frame.shape()[1];
    for (int y = 0; y < h; ++y) {
        const double py = (y + 0.5) / h;
        if (std::abs(py - cy) < half_height)
            for (int x = 0; x < w; ++x) frame.at(y, x) *= factor;
    }
}

/// One frame given that frame's annotation values and its position in the
/// clip (which drives the motion patterns).
inline Tensor render_frame(int frame_idx, int glasses, int head, int mouth, int eye,
                           double base, double phase, Rng& rng, const SynthConfig& cfg) {
    Tensor frame(Shape{cfg.height, cfg.width}, base);

    double cy = 0.5, cx = 0.5;
    if (head == 1) cx += 0.18 * std::sin(phase + frame_idx * 1.5707963267948966);
    if (head == 2) cy += 0.15 * std::sin(phase + frame_idx * 1.5707963267948966);

    add_blob(frame, cy, cx, 0.36, 0.18);  // face

    const double eye_y = cy - 0.12;
    if (eye == 1) {  // open
        add_blob(frame, eye_y, cx - 0.13, 0.055, 0.35);
        add_blob(frame, eye_y, cx + 0.13, 0.055, 0.35);
    } else {  // sleepy: smaller, dimmer, drooping
        add_blob(frame, eye_y + 0.02, cx - 0.13, 0.032, 0.10);
        add_blob(frame, eye_y + 0.02, cx + 0.13, 0.032, 0.10);
    }

    const double mouth_y = cy + 0.16;
    if (mouth == 0) {
        add_blob(frame, mouth_y, cx, 0.03, 0.08);
    } else if (mouth == 1) {  // talking: size alternates frame to frame
        add_blob(frame, mouth_y, cx, frame_idx % 2 ? 0.06 : 0.03, 0.15);
    } else {  // yawning: a dark opening that widens over the clip
        add_blob(frame, mouth_y, cx, 0.03 + 0.015 * frame_idx, -0.30);
    }

    if (glasses == 1 || glasses == 2)
        multiply_band(frame, eye_y, 0.035, 0.65);
    else if (glasses == 4)
        multiply_band(frame, eye_y, 0.06, 0.35);

    for (std::size_t i = 0; i < frame.size(); ++i)
        frame[i] = clamp01(frame[i] + rng.uniform(-0.02, 0.02));
    return frame;
}

}  // namespace synth_detail

/// Procedurally generates `n` labeled clips. Each clip owns the generator
/// stream mix_seed(seed, kClip, index), so the dataset is identical for a
/// given seed regardless of generation order or count of preceding clips.
/// Scenario (= glasses condition) and drowsiness are balanced by index;
/// every third clip deviates one annotation stream in one frame so the
/// frame-majority labeling path is exercised end to end.
inline Dataset synth_generate(int n, std::uint64_t seed, const SynthConfig& cfg = {}) {
    if (n < 1) throw std::invalid_argument("synth_generate: need at least 1 clip");
    if (cfg.height < 8 || cfg.width < 8)
        throw std::invalid_argument("synth_generate: frame extents must be at least 8");
    Dataset ds;
    ds.provenance = "synthetic seed " + std::to_string(seed);
    ds.clips.reserve(static_cast<std::size_t>(n));

    for (int index = 0; index < n; ++index) {
        Rng rng(mix_seed(seed, seed_purpose::kClip, static_cast<std::uint64_t>(index)));
        const int drowsy = index % 2;
        const int glasses = (index / 2) % kNumGlassesClasses;
        int head, mouth;
        const int eye = drowsy ? 0 : 1;  // sleepy eye iff drowsy
        if (drowsy) {
            head = rng.uniform_int(2) ? 2 : 0;   // nodding or still
            mouth = rng.uniform_int(2) ? 2 : 0;  // yawning or still
        } else {
            head = rng.uniform_int(2) ? 1 : 0;   // looking around or still
            mouth = rng.uniform_int(2) ? 1 : 0;  // talking or still
        }

        FrameSequence seq;
        seq.glasses.assign(kFramesPerClip, glasses);
        seq.head.assign(kFramesPerClip, head);
        seq.mouth.assign(kFramesPerClip, mouth);
        seq.eye.assign(kFramesPerClip, eye);
        seq.drowsy.assign(kFramesPerClip, drowsy);
        if (index % 3 == 0) {
            // One off-majority frame in one condition stream (4-vs-1 keeps
            // the clip label intact).
            const int frame = rng.uniform_int(kFramesPerClip);
            switch ((index / 3) % 4) {
                case 0:
                    seq.glasses[static_cast<std::size_t>(frame)] =
                        (glasses + 1) % kNumGlassesClasses;
                    break;
                case 1:
                    seq.head[static_cast<std::size_t>(frame)] = (head + 1) % kNumHeadClasses;
                    break;
                case 2:
                    seq.mouth[static_cast<std::size_t>(frame)] = (mouth + 1) % kNumMouthClasses;
                    break;
                default:
                    seq.eye[static_cast<std::size_t>(frame)] = 1 - eye;
                    break;
            }
        }

        const double phase = rng.uniform(0.0, 6.283185307179586);
        const double base_jitter = rng.uniform(-0.03, 0.03);
        seq.frames = Tensor(Shape{kFramesPerClip, cfg.height, cfg.width});
        for (int f = 0; f < kFramesPerClip; ++f) {
            const auto fi = static_cast<std::size_t>(f);
            const double base =
                (synth_detail::is_day(seq.glasses[fi]) ? 0.55 : 0.12) + base_jitter;
            Tensor frame = synth_detail::render_frame(f, seq.glasses[fi], seq.head[fi],
                                                      seq.mouth[fi], seq.eye[fi], base, phase,
                                                      rng, cfg);
            for (int y = 0; y < cfg.height; ++y)
                for (int x = 0; x < cfg.width; ++x)
                    seq.frames.at(f, y, x) = frame.at(y, x);
        }
        ds.clips.push_back(seal_clip(seq));
    }
    return ds;
}

// ---------------------------------------------------------------------------
// Dataset container

inline constexpr char kDatasetMagic[4] = {'C', 'A', 'D', 'D'};
inline constexpr std::uint32_t kDatasetVersion = 1;

inline void check_dataset(const Dataset& ds) {
    for (std::size_t i = 0; i < ds.clips.size(); ++i) {
        const LabeledClip& c = ds.clips[i];
        if (c.clip.shape().rank() != 4)
            throw ShapeError("dataset: clip " + std::to_string(i) + " is not rank-4");
        if (c.clip.shape() != ds.clips[0].clip.shape())
            throw ShapeError("dataset: clip " + std::to_string(i) + " extents " +
                             c.clip.shape().str() + " differ from " +
                             ds.clips[0].clip.shape().str());
        check_clip_labels(c.labels);
    }
}

inline void save_dataset(const std::filesystem::path& path, const Dataset& ds) {
    check_dataset(ds);
    atomic_write_file(path, [&ds](std::ostream& os) {
        write_magic(os, kDatasetMagic);
        write_u32(os, kDatasetVersion);
        write_u32(os, static_cast<std::uint32_t>(ds.clips.size()));
        for (const LabeledClip& c : ds.clips) {
            for (int ax = 0; ax < 4; ++ax)
                write_u32(os, static_cast<std::uint32_t>(c.clip.shape()[ax]));
            for (std::size_t i = 0; i < c.clip.size(); ++i) write_f64(os, c.clip[i]);
            write_byte(os, static_cast<std::uint8_t>(c.labels.glasses));
            write_byte(os, static_cast<std::uint8_t>(c.labels.head));
            write_byte(os, static_cast<std::uint8_t>(c.labels.mouth));
            write_byte(os, static_cast<std::uint8_t>(c.labels.eye));
            write_byte(os, static_cast<std::uint8_t>(c.labels.drowsy));
            write_byte(os, static_cast<std::uint8_t>(c.labels.scenario));
        }
    });
}

inline Dataset load_dataset(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IOError("cannot open dataset " + path.string());
    expect_magic(is, kDatasetMagic, "dataset");
    const std::uint32_t version = read_u32(is, "dataset version");
    if (version != kDatasetVersion)
        throw IOError("unsupported dataset version " + std::to_string(version));
    const std::uint32_t count = read_u32(is, "clip count");
    Dataset ds;
    ds.provenance = path.string();
    ds.clips.reserve(count);
    for (std::uint32_t ci = 0; ci < count; ++ci) {
        std::vector<int> extents(4);
        for (int ax = 0; ax < 4; ++ax) {
            const std::uint32_t e = read_u32(is, "clip extent");
            if (e == 0 || e > (1u << 20)) throw IOError("dataset: implausible clip extent");
            extents[static_cast<std::size_t>(ax)] = static_cast<int>(e);
        }
        LabeledClip c;
        c.clip = Tensor(Shape(extents));
        for (std::size_t i = 0; i < c.clip.size(); ++i) c.clip[i] = read_f64(is, "pixel data");
        c.labels.glasses = read_byte(is, "glasses label");
        c.labels.head = read_byte(is, "head label");
        c.labels.mouth = read_byte(is, "mouth label");
        c.labels.eye = read_byte(is, "eye label");
        c.labels.drowsy = read_byte(is, "drowsiness label");
        c.labels.scenario = read_byte(is, "scenario tag");
        try {
            check_clip_labels(c.labels);
        } catch (const std::invalid_argument& e) {
            throw IOError("dataset clip " + std::to_string(ci) + ": " + e.what());
        }
        ds.clips.push_back(std::move(c));
    }
    if (is.peek() != std::ifstream::traits_type::eof())
        throw IOError("dataset " + path.string() + " has trailing bytes");
    try {
        check_dataset(ds);
    } catch (const std::invalid_argument& e) {
        throw IOError("dataset " + path.string() + ": " + e.what());
    }
    return ds;
}

// ---------------------------------------------------------------------------
// Frame-folder import (PGM frames + plain-text annotation file)

namespace pgm_detail {

inline int next_token(std::istream& is, const std::string& path) {
    // Whitespace-separated integer tokens; '#' starts a comment to EOL.
    for (;;) {
        int c = is.peek();
        if (c == std::istream::traits_type::eof())
            throw IOError("truncated PGM header in " + path);
        if (c == '#') {
            std::string line;
            std::getline(is, line);
        } else if (std::isspace(static_cast<unsigned char>(c))) {
            is.get();
        } else {
            break;
        }
    }
    int value = 0;
    if (!(is >> value)) throw IOError("malformed PGM header in " + path);
    return value;
}

}  // namespace pgm_detail

/// Reads one binary (P5) 8-bit grayscale PGM into a [H,W] frame in [0,1].
inline Tensor load_pgm(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IOError("cannot open PGM " + path.string());
    char p = 0, five = 0;
    is.get(p);
    is.get(five);
    if (p != 'P' || five != '5') throw IOError("not a binary (P5) PGM: " + path.string());
    const int w = pgm_detail::next_token(is, path.string());
    const int h = pgm_detail::next_token(is, path.string());
    const int maxval = pgm_detail::next_token(is, path.string());
    if (w < 1 || h < 1 || maxval < 1 || maxval > 255)
        throw IOError("unsupported PGM geometry/depth in " + path.string());
    is.get();  // single whitespace byte before raster data
    std::vector<char> raster(static_cast<std::size_t>(w) * h);
    if (!is.read(raster.data(), static_cast<std::streamsize>(raster.size())))
        throw IOError("truncated PGM raster in " + path.string());
    Tensor frame(Shape{h, w});
    for (std::size_t i = 0; i < raster.size(); ++i)
        frame[i] = static_cast<double>(static_cast<unsigned char>(raster[i])) / maxval;
    return frame;
}

/// Imports a directory of P5 PGM frames plus an annotation file with one
/// line per frame: `frame-index glasses head mouth eye drowsy`. Frames are
/// taken in index order, resized to (height,width), and grouped into
/// consecutive non-overlapping 5-frame clips; leftover frames are dropped.
inline Dataset import_frames(const std::filesystem::path& dir,
                             const std::filesystem::path& label_file, int height, int width) {
    std::ifstream lf(label_file);
    if (!lf) throw IOError("cannot open label file " + label_file.string());
    struct Row {
        int glasses, head, mouth, eye, drowsy;
    };
    std::vector<Row> rows;
    std::string line;
    int lineno = 0;
    while (std::getline(lf, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        int idx = 0;
        Row r{};
        if (!(ls >> idx >> r.glasses >> r.head >> r.mouth >> r.eye >> r.drowsy))
            throw IOError("label file line " + std::to_string(lineno) +
                          ": expected `index glasses head mouth eye drowsy`");
        if (idx != static_cast<int>(rows.size()))
            throw IOError("label file line " + std::to_string(lineno) +
                          ": frame indices must be 0,1,2,... without gaps");
        rows.push_back(r);
    }

    std::vector<std::filesystem::path> frame_paths;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".pgm")
            frame_paths.push_back(entry.path());
    std::sort(frame_paths.begin(), frame_paths.end());
    if (frame_paths.size() != rows.size())
        throw IOError("found " + std::to_string(frame_paths.size()) + " PGM frames but " +
                      std::to_string(rows.size()) + " label lines");
    if (frame_paths.size() < static_cast<std::size_t>(kFramesPerClip))
        throw IOError("need at least " + std::to_string(kFramesPerClip) + " frames, found " +
                      std::to_string(frame_paths.size()));

    Dataset ds;
    ds.provenance = dir.string();
    const std::size_t n_clips = frame_paths.size() / kFramesPerClip;
    for (std::size_t c = 0; c < n_clips; ++c) {
        FrameSequence seq;
        seq.frames = Tensor(Shape{kFramesPerClip, height, width});
        for (int f = 0; f < kFramesPerClip; ++f) {
            const std::size_t src = c * kFramesPerClip + static_cast<std::size_t>(f);
            Tensor frame = resize_bilinear(load_pgm(frame_paths[src]), height, width);
            for (int y = 0; y < height; ++y)
                for (int x = 0; x < width; ++x) seq.frames.at(f, y, x) = frame.at(y, x);
            seq.glasses.push_back(rows[src].glasses);
            seq.head.push_back(rows[src].head);
            seq.mouth.push_back(rows[src].mouth);
            seq.eye.push_back(rows[src].eye);
            seq.drowsy.push_back(rows[src].drowsy);
        }
        try {
            ds.clips.push_back(seal_clip(seq));
        } catch (const std::invalid_argument& e) {
            throw IOError("clip " + std::to_string(c) + ": " + e.what());
        }
    }
    return ds;
}

}  // namespace cadre
