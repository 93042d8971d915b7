#include "clarq/fbl.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace clarq {

namespace {

constexpr double kLn2 = std::numbers::ln2;

double dispersion_awgn(double snr) {
  const double r = 1.0 / (1.0 + snr);
  return 1.0 - r * r;
}

void require_positive_snr(double snr_linear) {
  if (!(snr_linear > 0.0) || !std::isfinite(snr_linear))
    throw std::invalid_argument("channel SNR must be a positive finite linear ratio, got " +
                                std::to_string(snr_linear));
}

}  // namespace

ChannelSpec ChannelSpec::from_linear(double snr_linear) {
  require_positive_snr(snr_linear);
  return {snr_linear, std::log2(1.0 + snr_linear), dispersion_awgn(snr_linear)};
}

ChannelSpec ChannelSpec::from_db(double snr_db) { return from_linear(db_to_linear(snr_db)); }

ChannelSpec ChannelSpec::with_dispersion(double snr_linear, double dispersion) {
  require_positive_snr(snr_linear);
  if (!(dispersion > 0.0)) throw std::invalid_argument("channel dispersion must be positive");
  return {snr_linear, std::log2(1.0 + snr_linear), dispersion};
}

double ChannelSpec::snr_db() const { return linear_to_db(snr_linear); }

ChannelSpec ChannelSpec::scaled(double factor) const { return from_linear(snr_linear * factor); }

void FblParams::validate() const {
  if (packet_bits < 1) throw std::invalid_argument("packet_bits must be >= 1");
  if (!(eps_max > 0.0 && eps_max <= 0.5))
    throw std::invalid_argument("eps_max must lie in (0, 0.5]");
}

void FrameBudget::validate() const {
  if (!(frame_time > 0.0)) throw std::invalid_argument("frame_time must be positive");
  if (!(symbol_time > 0.0)) throw std::invalid_argument("symbol_time must be positive");
  if (!(feedback_time >= 0.0)) throw std::invalid_argument("feedback_time must be nonnegative");
  if (n_max() < 1) throw std::invalid_argument("frame_time must hold at least one symbol");
}

int FrameBudget::n_max() const {
  // The small guard keeps 10 ms / 4 us at 2500 despite binary rounding.
  return static_cast<int>(std::floor(frame_time / symbol_time * (1.0 + 1e-12)));
}

int FrameBudget::feedback_symbols() const {
  if (feedback_time <= 0.0) return 0;
  return static_cast<int>(std::ceil(feedback_time / symbol_time * (1.0 - 1e-12)));
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double linear_to_db(double linear) { return 10.0 * std::log10(linear); }

double q_function(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double q_inverse(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::domain_error("q_inverse: probability must lie in (0, 1), got " + std::to_string(p));
  return std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

double q_function_approx(double x) {
  constexpr double a = 0.339;
  constexpr double b = 5.510;
  const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  return pdf / ((1.0 - a) * x + a * std::sqrt(x * x + b));
}

double packet_error_rate(const ChannelSpec& ch, int n, int packet_bits) {
  if (n < 1 || packet_bits < 1)
    throw std::invalid_argument("packet_error_rate: blocklength and packet size must be >= 1");
  const double nn = n;
  const double arg = std::sqrt(nn / ch.dispersion) * (ch.capacity - packet_bits / nn) * kLn2;
  return q_function(arg);
}

double harq2_error_rate(const ChannelSpec& ch, int cumulative_n, int packet_bits) {
  return packet_error_rate(ch, cumulative_n, packet_bits);
}

double harq2_error_rate(const ChannelSpec& ch, std::span<const int> attempts, int packet_bits) {
  long total = 0;
  for (int n : attempts) {
    if (n < 1) throw std::invalid_argument("harq2_error_rate: attempt blocklength must be >= 1");
    total += n;
  }
  if (total < 1) throw std::invalid_argument("harq2_error_rate: no attempts given");
  return packet_error_rate(ch, static_cast<int>(total), packet_bits);
}

double combined_arq_error(std::span<const double> attempt_errors) {
  double e = 0.0;
  for (double ei : attempt_errors) e = e + ei - e * ei;
  return e;
}

double min_blocklength_real(const ChannelSpec& ch, const FblParams& params) {
  params.validate();
  const double beta =
      -std::sqrt(2.0 * ch.dispersion) * boost::math::erfc_inv(2.0 * params.eps_max) / kLn2;
  // The quadratic is in sqrt(n): C x^2 + beta x - d = 0.
  const double root_sqrt =
      (std::sqrt(beta * beta + 4.0 * ch.capacity * params.packet_bits) - beta) /
      (2.0 * ch.capacity);
  return root_sqrt * root_sqrt;
}

int min_blocklength(const ChannelSpec& ch, const FblParams& params) {
  const double root = min_blocklength_real(ch, params);
  if (!(root < kBlocklengthCap)) return kBlocklengthCap;
  int n = std::max(1, static_cast<int>(std::ceil(root)));
  // Off-by-one guard against rounding in the inverse error function.
  while (n > 1 && packet_error_rate(ch, n - 1, params.packet_bits) <= params.eps_max) --n;
  while (packet_error_rate(ch, n, params.packet_bits) > params.eps_max) ++n;
  return n;
}

std::vector<double> error_table(const ChannelSpec& ch, int packet_bits, int n_max) {
  std::vector<double> table(static_cast<std::size_t>(std::max(n_max, 0)) + 1, 1.0);
  for (int n = 1; n <= n_max; ++n) table[n] = packet_error_rate(ch, n, packet_bits);
  return table;
}

}  // namespace clarq
