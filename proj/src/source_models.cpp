#include "beamkit/source_models.hpp"

#include <algorithm>

namespace beamkit {

bool requires_mask(BeamformerVariant v) {
  switch (v) {
    case BeamformerVariant::MaskMvdr:
    case BeamformerVariant::MaskMldr:
    case BeamformerVariant::MaskPMldr:
    case BeamformerVariant::MaskSMldr:
      return true;
    default:
      return false;
  }
}

bool is_iterative(BeamformerVariant v) {
  switch (v) {
    case BeamformerVariant::Mldr:
    case BeamformerVariant::MaskPMldr:
    case BeamformerVariant::MaskSMldr:
      return true;
    default:
      return false;
  }
}

std::string variant_name(BeamformerVariant v) {
  switch (v) {
    case BeamformerVariant::Mpdr: return "mpdr";
    case BeamformerVariant::MaskMvdr: return "mask_mvdr";
    case BeamformerVariant::Mldr: return "mldr";
    case BeamformerVariant::MaskMldr: return "mask_mldr";
    case BeamformerVariant::MaskPMldr: return "mask_p_mldr";
    case BeamformerVariant::MaskSMldr: return "mask_s_mldr";
  }
  return "?";
}

std::optional<BeamformerVariant> variant_from_name(const std::string& name) {
  for (BeamformerVariant v :
       {BeamformerVariant::Mpdr, BeamformerVariant::MaskMvdr, BeamformerVariant::Mldr,
        BeamformerVariant::MaskMldr, BeamformerVariant::MaskPMldr, BeamformerVariant::MaskSMldr})
    if (variant_name(v) == name) return v;
  return std::nullopt;
}

RealField median_magnitude(const Spectrogram& spec, const std::vector<int>& excluded) {
  const int m_count = spec.channels();
  std::vector<int> keep;
  for (int m = 0; m < m_count; ++m)
    if (std::find(excluded.begin(), excluded.end(), m) == excluded.end()) keep.push_back(m);
  if (keep.empty()) throw InvalidInput("median_magnitude: all channels excluded");

  const long t_count = spec.frames();
  const int k_count = spec.bins();
  RealField out(t_count, k_count);
  std::vector<double> mags(keep.size());
  for (long t = 0; t < t_count; ++t) {
    for (int k = 0; k < k_count; ++k) {
      for (size_t i = 0; i < keep.size(); ++i) mags[i] = std::abs(spec.ch[keep[i]](t, k));
      std::sort(mags.begin(), mags.end());
      const size_t n = mags.size();
      out(t, k) = (n % 2 == 1) ? mags[n / 2] : 0.5 * (mags[n / 2 - 1] + mags[n / 2]);
    }
  }
  return out;
}

RealField moving_average_frames(const RealField& field, int tau0) {
  if (tau0 < 0) throw InvalidInput("moving_average_frames: tau0 must be >= 0");
  if (tau0 == 0) return field;
  const long t_count = field.rows();
  RealField out(t_count, field.cols());
  for (long t = 0; t < t_count; ++t) {
    const long lo = std::max<long>(0, t - tau0);
    const long hi = std::min<long>(t_count - 1, t + tau0);
    out.row(t) = field.middleRows(lo, hi - lo + 1).colwise().mean();
  }
  return out;
}

RealField tvv_from_output(const CMat& y, int tau0, double floor) {
  const RealField power = y.cwiseAbs2().array();
  return moving_average_frames(power, tau0).max(floor);
}

RealField tvv_from_mask(const RealField& mask, const RealField& medmag, int tau0, double floor) {
  if (mask.rows() != medmag.rows() || mask.cols() != medmag.cols())
    throw InvalidInput("tvv_from_mask: shape mismatch");
  return moving_average_frames(mask * medmag.square(), tau0).max(floor);
}

RealField tvv_map(const CMat& y, const RealField& mask, const RealField& medmag, int tau0,
                  double alpha_lambda, double floor) {
  if (y.rows() != mask.rows() || y.cols() != mask.cols() || mask.rows() != medmag.rows() ||
      mask.cols() != medmag.cols())
    throw InvalidInput("tvv_map: shape mismatch");
  const RealField numer = (y.cwiseAbs2().array() + mask * medmag.square()) / (alpha_lambda + 2.0);
  return moving_average_frames(numer, tau0).max(floor);
}

RealField tvv_sparse(const RealField& mask, const RealField& medmag, int tau0, double floor) {
  if (mask.rows() != medmag.rows() || mask.cols() != medmag.cols())
    throw InvalidInput("tvv_sparse: shape mismatch");
  return (moving_average_frames(mask * medmag.square(), tau0) / 4.0).max(floor);
}

RealField weight_gaussian(const RealField& lambda, double phi0) {
  return lambda.inverse().min(phi0);
}

RealField weight_sparse(const RealField& lambda, const CMat& y, double phi0, double mag_floor) {
  if (y.rows() != lambda.rows() || y.cols() != lambda.cols())
    throw InvalidInput("weight_sparse: shape mismatch");
  const RealField mag = y.cwiseAbs().array().max(mag_floor);
  return (2.0 * lambda.sqrt() * mag).inverse().min(phi0);
}

RealField weight_mask_mvdr(const RealField& mask) { return 1.0 - mask; }

RealField weight_noise_laplacian(const RealField& z_norm, double phi0) {
  return (2.0 * z_norm.max(1e-300)).inverse().min(phi0);
}

RealField weight_noise_gaussian(long frames, int bins) {
  return RealField::Ones(frames, bins);
}

RealField variant_phi(BeamformerVariant v, const CMat& y, const RealField* mask,
                      const RealField& medmag, const ModelParams& p) {
  if (requires_mask(v) && mask == nullptr)
    throw InvalidInput("variant_phi: " + variant_name(v) + " requires a mask");
  switch (v) {
    case BeamformerVariant::Mpdr:
      return RealField::Ones(y.rows(), y.cols());
    case BeamformerVariant::MaskMvdr:
      return weight_mask_mvdr(*mask);
    case BeamformerVariant::Mldr:
      return weight_gaussian(tvv_from_output(y, p.tau0, p.tvv_floor), p.phi0);
    case BeamformerVariant::MaskMldr:
      return weight_gaussian(tvv_from_mask(*mask, medmag, p.tau0, p.tvv_floor), p.phi0);
    case BeamformerVariant::MaskPMldr:
      return weight_gaussian(tvv_map(y, *mask, medmag, p.tau0, p.alpha_lambda, p.tvv_floor),
                             p.phi0);
    case BeamformerVariant::MaskSMldr:
      return weight_sparse(tvv_sparse(*mask, medmag, p.tau0, p.tvv_floor), y, p.phi0,
                           p.mag_floor);
  }
  throw InvalidInput("variant_phi: unknown variant");
}

}  // namespace beamkit
