#pragma once

#include <cstddef>
#include <vector>

#include "augmotion/skeleton.hpp"

namespace augmotion {

inline constexpr std::size_t kDefaultWindowLength = 16;
inline constexpr std::size_t kDefaultWindowStep = 16;

struct ClipWindow {
  std::size_t start_frame = 0;
  std::size_t length = 0;

  friend bool operator==(const ClipWindow&, const ClipWindow&) = default;
};

/// Full windows starting at 0, step, 2*step, ...; a trailing partial window is
/// dropped.
std::vector<ClipWindow> sliding_windows(std::size_t frame_count, std::size_t window_len,
                                        std::size_t step);
std::vector<ClipWindow> sliding_windows(const PoseSequence& seq, std::size_t window_len,
                                        std::size_t step);

PoseSequence extract_clip(const PoseSequence& seq, const ClipWindow& window);

}  // namespace augmotion
