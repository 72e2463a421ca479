#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "cadre/tensor.hpp"

// Label vocabulary for the four scene-understanding factors plus the
// drowsiness target, and the frame-majority rule that assigns one label per
// clip from per-frame annotations.

namespace cadre {

constexpr int kFramesPerClip = 5;

constexpr int kNumGlassesClasses = 5;  // glasses / illumination condition
constexpr int kNumHeadClasses = 3;
constexpr int kNumMouthClasses = 3;
constexpr int kNumEyeClasses = 2;
constexpr int kNumDetectorClasses = 2;

// Class name tables; the index into each table is the one-hot position.
inline const std::array<const char*, 5> kGlassesNames = {
    "Day bare face", "Day glasses", "Night glasses", "Night bare face",
    "Day sunglasses"};
inline const std::array<const char*, 3> kHeadNames = {
    "Normal status", "Looking at both sides", "Nodding"};
inline const std::array<const char*, 3> kMouthNames = {
    "Normal status", "Talking and laughing", "Yawning"};
inline const std::array<const char*, 2> kEyeNames = {"Sleepiness eye", "Normal status"};
inline const std::array<const char*, 2> kDetectorNames = {"non-drowsiness", "drowsiness"};

/// One label per factor for a whole clip. `scenario` is the evaluation
/// grouping and always equals the glasses/illumination condition here.
struct ClipLabels {
    int glasses = 0;
    int head = 0;
    int mouth = 0;
    int eye = 0;
    int drowsy = 0;
    int scenario = 0;
};

inline void check_class_index(int value, int num_classes, const char* what) {
    if (value < 0 || value >= num_classes)
        throw std::invalid_argument(std::string(what) + " label " + std::to_string(value) +
                                    " outside [0," + std::to_string(num_classes) + ")");
}

inline void check_clip_labels(const ClipLabels& l) {
    check_class_index(l.glasses, kNumGlassesClasses, "glasses");
    check_class_index(l.head, kNumHeadClasses, "head");
    check_class_index(l.mouth, kNumMouthClasses, "mouth");
    check_class_index(l.eye, kNumEyeClasses, "eye");
    check_class_index(l.drowsy, kNumDetectorClasses, "drowsiness");
    check_class_index(l.scenario, kNumGlassesClasses, "scenario");
}

/// Rank-1 one-hot with a single 1.0 at `index`.
inline Tensor onehot(int index, int num_classes) {
    check_class_index(index, num_classes, "onehot");
    Tensor t(Shape{num_classes});
    t[static_cast<std::size_t>(index)] = 1.0;
    return t;
}

/// Collapses five per-frame labels to one clip label: a value covering at
/// least 3 of the 5 frames (temporal overlap >= 1/2) wins; with no majority
/// the middle frame decides. At most one value can reach 3 in 5 frames, so
/// the winner is unambiguous.
inline int clip_label_from_frames(const std::vector<int>& frames) {
    if (frames.size() != static_cast<std::size_t>(kFramesPerClip))
        throw std::invalid_argument("clip_label_from_frames: need exactly " +
                                    std::to_string(kFramesPerClip) + " frame labels, got " +
                                    std::to_string(frames.size()));
    for (int value : frames)
        if (value < 0) throw std::invalid_argument("clip_label_from_frames: negative label");
    for (std::size_t i = 0; i < frames.size(); ++i) {
        int count = 0;
        for (int value : frames)
            if (value == frames[i]) ++count;
        if (count * 2 >= kFramesPerClip + 1) return frames[i];
    }
    return frames[kFramesPerClip / 2];
}

}  // namespace cadre
