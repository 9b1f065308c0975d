#include "augmotion/metrics.hpp"

#include <unordered_map>

#include "augmotion/error.hpp"
#include "augmotion/kabsch.hpp"

namespace augmotion {

double mpjpe(std::span<const Vec3> pred, std::span<const Vec3> gt) {
  if (pred.size() != gt.size())
    throw Error(ErrorKind::kShapeMismatch, "pred and gt have different joint counts");
  if (pred.empty()) throw Error(ErrorKind::kEmptyInput, "no joints to compare");
  double sum = 0.0;
  for (std::size_t j = 0; j < pred.size(); ++j) sum += (pred[j] - gt[j]).norm();
  return sum / static_cast<double>(pred.size());
}

double mpjpe(const PoseFrame& pred, const PoseFrame& gt) { return mpjpe(pred.coords, gt.coords); }

SimilarityTransform procrustes_align(std::span<const Vec3> pred, std::span<const Vec3> gt) {
  const auto svd = cross_covariance_svd(pred, gt);
  if (!(svd.centred_sq_norm_a > 0.0))
    throw Error(ErrorKind::kDegenerate, "prediction collapses to a point");
  SimilarityTransform out;
  out.rotation = svd.rotation();
  const double trace = svd.singular_values[0] + svd.singular_values[1] + svd.d * svd.singular_values[2];
  out.scale = trace / svd.centred_sq_norm_a;
  if (!(out.scale > 0.0))
    throw Error(ErrorKind::kDegenerate, "non-positive Procrustes scale");
  out.translation = svd.centroid_b - out.scale * (out.rotation * svd.centroid_a);
  return out;
}

double p_mpjpe(std::span<const Vec3> pred, std::span<const Vec3> gt) {
  const auto t = procrustes_align(pred, gt);
  std::vector<Vec3> aligned;
  aligned.reserve(pred.size());
  for (const auto& p : pred) aligned.push_back(t.apply(p));
  return mpjpe(aligned, gt);
}

double p_mpjpe(const PoseFrame& pred, const PoseFrame& gt) { return p_mpjpe(pred.coords, gt.coords); }

EvalReport evaluate_sequences(const PoseSequence& pred, const PoseSequence& gt) {
  if (pred.topology.joint_names() != gt.topology.joint_names())
    throw Error(ErrorKind::kShapeMismatch, "pred and gt use different joint layouts");
  if (pred.units != gt.units)
    throw Error(ErrorKind::kShapeMismatch,
                "pred units '" + pred.units + "' differ from gt units '" + gt.units + "'");
  if (pred.frames.empty()) throw Error(ErrorKind::kEmptyInput, "prediction has no frames");

  std::unordered_map<std::size_t, const PoseFrame*> by_index;
  for (const auto& f : gt.frames) by_index.emplace(f.frame_index, &f);

  EvalReport report;
  report.units = gt.units;
  for (const auto& f : pred.frames) {
    const auto it = by_index.find(f.frame_index);
    if (it == by_index.end())
      throw Error(ErrorKind::kShapeMismatch,
                  "predicted frame " + std::to_string(f.frame_index) + " missing from ground truth");
    FrameScore s{f.frame_index, mpjpe(f, *it->second), p_mpjpe(f, *it->second)};
    report.mpjpe += s.mpjpe;
    report.p_mpjpe += s.p_mpjpe;
    report.per_frame.push_back(s);
  }
  report.mpjpe /= static_cast<double>(report.per_frame.size());
  report.p_mpjpe /= static_cast<double>(report.per_frame.size());
  return report;
}

}  // namespace augmotion
