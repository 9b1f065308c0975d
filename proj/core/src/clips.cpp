#include "augmotion/clips.hpp"

#include "augmotion/error.hpp"

namespace augmotion {

std::vector<ClipWindow> sliding_windows(std::size_t frame_count, std::size_t window_len,
                                        std::size_t step) {
  if (window_len == 0) throw Error(ErrorKind::kInvalidArgument, "window length must be positive");
  if (step == 0) throw Error(ErrorKind::kInvalidArgument, "window step must be positive");
  if (window_len > frame_count)
    throw Error(ErrorKind::kInvalidArgument, "window length " + std::to_string(window_len) +
                                                 " exceeds frame count " +
                                                 std::to_string(frame_count));
  std::vector<ClipWindow> windows;
  windows.reserve((frame_count - window_len) / step + 1);
  for (std::size_t start = 0; start + window_len <= frame_count; start += step)
    windows.push_back({start, window_len});
  return windows;
}

std::vector<ClipWindow> sliding_windows(const PoseSequence& seq, std::size_t window_len,
                                        std::size_t step) {
  return sliding_windows(seq.frames.size(), window_len, step);
}

PoseSequence extract_clip(const PoseSequence& seq, const ClipWindow& window) {
  if (window.length == 0 || window.start_frame + window.length > seq.frames.size())
    throw Error(ErrorKind::kOutOfBounds, "clip window exceeds the sequence");
  PoseSequence clip = seq;
  clip.frames.assign(seq.frames.begin() + static_cast<std::ptrdiff_t>(window.start_frame),
                     seq.frames.begin() +
                         static_cast<std::ptrdiff_t>(window.start_frame + window.length));
  return clip;
}

}  // namespace augmotion
