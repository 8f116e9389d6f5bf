#include "cupgame/core.hpp"

#include <array>
#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <vector>

namespace cupgame {

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

BigInt parse_integer(std::string_view s, std::string_view whole) {
  bool neg = false;
  if (!s.empty() && (s[0] == '-' || s[0] == '+')) {
    neg = s[0] == '-';
    s.remove_prefix(1);
  }
  if (!all_digits(s)) throw ConfigError("malformed number '" + std::string(whole) + "'");
  BigInt v{std::string(s)};
  return neg ? BigInt(-v) : v;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    BigInt num = parse_integer(text.substr(0, slash), text);
    BigInt den = parse_integer(text.substr(slash + 1), text);
    if (den.is_zero()) throw ConfigError("zero denominator in '" + std::string(text) + "'");
    return Rational(num, den);
  }
  if (auto dot = text.find('.'); dot != std::string_view::npos) {
    std::string_view ip = text.substr(0, dot), fp = text.substr(dot + 1);
    bool neg = !ip.empty() && ip[0] == '-';
    if (!ip.empty() && (ip[0] == '-' || ip[0] == '+')) ip.remove_prefix(1);
    if (ip.empty()) ip = "0";
    if (!all_digits(ip) || !all_digits(fp)) throw ConfigError("malformed number '" + std::string(text) + "'");
    BigInt scale = pow(BigInt(10), static_cast<unsigned>(fp.size()));
    BigInt num = BigInt(std::string(ip)) * scale + BigInt(std::string(fp));
    Rational r(num, scale);
    return neg ? Rational(-r) : r;
  }
  return Rational(parse_integer(text, text));
}

std::string format_rational(const Rational& x) {
  BigInt num = numerator(x), den = denominator(x);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

BigInt numerator_of(const Rational& x) { return numerator(x); }
BigInt denominator_of(const Rational& x) { return denominator(x); }

double to_double(const Rational& x) { return x.convert_to<double>(); }

BigInt lcm_of(const BigInt& a, const BigInt& b) {
  if (a.is_zero() || b.is_zero()) return 0;
  return abs(a / gcd(a, b) * b);
}

WaterAmount::WaterAmount(BigInt units) : units_(std::move(units)) {
  if (units_.sign() < 0) throw NegativeWater("negative water amount " + units_.str());
}

WaterAmount& WaterAmount::operator-=(const WaterAmount& o) {
  if (units_.compare(o.units_) < 0)
    throw NegativeWater("water would become negative: " + units_.str() + " - " + o.units_.str());
  units_ -= o.units_;
  return *this;
}

WaterAmount to_units(const Rational& x, const BigInt& D) {
  if (x.sign() < 0) throw NegativeWater("negative water amount " + format_rational(x));
  Rational scaled = x * D;
  if (denominator(scaled) != 1)
    throw NonRepresentable(format_rational(x) + " is not a multiple of 1/" + D.str());
  return WaterAmount(BigInt(numerator(scaled)));
}

Rational to_water(const WaterAmount& w, const BigInt& D) { return Rational(w.units(), D); }

double to_double(const WaterAmount& w, const BigInt& D) {
  const BigInt& u = w.units();
  if (u.is_zero()) return 0.0;
  // Keep about 62 significant bits of each side; the quotient needs no more.
  const long su = static_cast<long>(msb(u)) - 62;
  const long sd = static_cast<long>(msb(D)) - 62;
  const double a = su > 0 ? static_cast<BigInt>(u >> su).convert_to<double>() : u.convert_to<double>();
  const double b = sd > 0 ? static_cast<BigInt>(D >> sd).convert_to<double>() : D.convert_to<double>();
  return std::ldexp(a / b, static_cast<int>(std::max(su, 0L) - std::max(sd, 0L)));
}

std::int64_t whole_part(const WaterAmount& w, const BigInt& D) {
  const BigInt& u = w.units();
  const auto& ub = u.backend();
  const auto& db = D.backend();
  if (ub.size() == 1 && db.size() == 1) {  // one 64-bit limb each
    static_assert(sizeof(*ub.limbs()) == 8);
    return static_cast<std::int64_t>(*ub.limbs() / *db.limbs());
  }
  if (u < D) return 0;
  // Small quotients by comparison against cached multiples of D.
  thread_local BigInt cached_d;
  thread_local std::vector<BigInt> multiples;  // multiples[k] = (k + 1) * D
  if (multiples.empty() || cached_d != D) {
    cached_d = D;
    multiples.clear();
    BigInt m = 0;
    for (int k = 0; k < 8; ++k) multiples.push_back(m += D);
  }
  for (std::size_t k = 1; k < multiples.size(); ++k)
    if (u < multiples[k]) return static_cast<std::int64_t>(k);
  BigInt q = u / D;
  if (q > std::numeric_limits<std::int64_t>::max()) throw NonRepresentable("fill too large for whole-unit count");
  return q.convert_to<std::int64_t>();
}

namespace {
constexpr std::array<std::pair<VariantKind, std::string_view>, 7> kVariantNames{{
    {VariantKind::SingleProcessor, "single"},
    {VariantKind::MultiProcessor, "multi"},
    {VariantKind::RenormalizedMulti, "renormalized"},
    {VariantKind::DynamicSingle, "dynamic_single"},
    {VariantKind::DynamicMulti, "dynamic_multi"},
    {VariantKind::CupFlushing, "cup_flushing"},
    {VariantKind::UniversalEmptying, "universal"},
}};
}  // namespace

std::string_view variant_name(VariantKind k) {
  for (auto& [kind, name] : kVariantNames)
    if (kind == k) return name;
  return "?";
}

VariantKind parse_variant(std::string_view name) {
  for (auto& [kind, n] : kVariantNames)
    if (n == name) return kind;
  std::string known;
  for (auto& [kind, n] : kVariantNames) known += (known.empty() ? "" : ", ") + std::string(n);
  throw ConfigError("unknown variant '" + std::string(name) + "' (known: " + known + ")");
}

bool is_dynamic(VariantKind k) { return k == VariantKind::DynamicSingle || k == VariantKind::DynamicMulti; }

bool is_flushing(VariantKind k) { return k == VariantKind::CupFlushing || k == VariantKind::UniversalEmptying; }

namespace {
bool uses_epsilon(VariantKind k) { return !is_flushing(k); }
}  // namespace

std::vector<std::string> validate_config(const GameConfig& cfg, const ConfigUse& use) {
  std::vector<std::string> out;
  const VariantKind k = cfg.kind();
  if (cfg.n < 1) out.push_back("n must be positive");
  if (cfg.p < 1) out.push_back("p must be positive");
  if (uses_epsilon(k) && (cfg.epsilon <= 0 || cfg.epsilon >= 1)) out.push_back("epsilon not in (0,1)");
  if (cfg.delta < 0 || cfg.delta >= 1) out.push_back("delta not in [0,1)");
  const BigInt& D = cfg.resolution;
  if (D <= 0 || bit_test(D, 0)) {
    out.push_back("D must be a positive even integer");
  } else {
    if (uses_epsilon(k) && D % denominator(cfg.epsilon) != 0)
      out.push_back("D not divisible by denominator of epsilon");
    if (D % denominator(cfg.delta) != 0) out.push_back("D not divisible by denominator of delta");
  }
  if (use.threshold_emptier) {
    if (k != VariantKind::RenormalizedMulti) out.push_back("variant: threshold emptier needs the renormalized game");
    if (cfg.delta <= 0 || numerator(cfg.delta) != 1) out.push_back("delta: 1/delta must be a positive integer");
  }
  if (k == VariantKind::CupFlushing && cfg.p != 1) out.push_back("p must be 1 in the cup-flushing game");
  if (cfg.variant.flush_slack && k != VariantKind::CupFlushing)
    out.push_back("flush_slack only applies to the cup-flushing game");
  return out;
}

BigInt default_resolution(const GameConfig& cfg) {
  BigInt d = lcm_of(denominator(cfg.epsilon), denominator(cfg.delta));
  d = lcm_of(d, BigInt(cfg.n) * cfg.n);
  d = lcm_of(d, BigInt(cfg.p));
  return 2 * d;
}

}  // namespace cupgame
