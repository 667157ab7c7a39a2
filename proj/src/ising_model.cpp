#include "qwalk/ising_model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>

#include "qwalk/errors.hpp"

namespace qwalk {

SpinConfig SpinConfig::from_index(std::uint64_t index, std::size_t n) {
  if (n > 64) throw std::invalid_argument("SpinConfig::from_index: n > 64");
  SpinConfig x(n);
  if (n > 0) x.words_[0] = n == 64 ? index : (index & ((std::uint64_t{1} << n) - 1));
  return x;
}

std::uint64_t SpinConfig::to_index() const {
  if (n_ > 64) throw std::invalid_argument("SpinConfig::to_index: n > 64");
  return words_.empty() ? 0 : words_[0];
}

IsingModel::IsingModel(std::size_t n, std::vector<Term> terms) : n_(n) {
  std::map<std::vector<std::uint32_t>, double> merged;
  for (auto& t : terms) {
    std::sort(t.support.begin(), t.support.end());
    if (t.support.empty()) throw std::invalid_argument("IsingModel: empty term support");
    if (std::adjacent_find(t.support.begin(), t.support.end()) != t.support.end())
      throw std::invalid_argument("IsingModel: repeated spin in term support");
    if (t.support.back() >= n) throw std::invalid_argument("IsingModel: spin index out of range");
    merged[t.support] += t.coupling;
  }
  // Keep the caller's term order for generated models; merging only drops later duplicates.
  std::map<std::vector<std::uint32_t>, bool> emitted;
  for (auto& t : terms) {
    if (emitted[t.support]) continue;
    emitted[t.support] = true;
    terms_.push_back(Term{merged[t.support], t.support});
  }

  std::vector<std::size_t> degree(n, 0);
  for (const auto& t : terms_) {
    arity_ = std::max(arity_, t.support.size());
    for (auto s : t.support) ++degree[s];
  }
  degree_bound_ = n ? *std::max_element(degree.begin(), degree.end()) : 0;

  incident_offset_.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) incident_offset_[i + 1] = incident_offset_[i] + degree[i];
  incident_.resize(incident_offset_[n]);
  std::vector<std::size_t> fill(incident_offset_.begin(), incident_offset_.end() - 1);
  for (std::size_t l = 0; l < terms_.size(); ++l)
    for (auto s : terms_[l].support) incident_[fill[s]++] = static_cast<std::uint32_t>(l);
}

MoveSet::MoveSet(std::size_t n, std::vector<std::vector<std::uint32_t>> moves) : n_(n) {
  std::vector<std::size_t> membership(n, 0);
  for (auto& m : moves) {
    std::sort(m.begin(), m.end());
    if (m.empty()) throw std::invalid_argument("MoveSet: empty (trivial) move");
    if (std::adjacent_find(m.begin(), m.end()) != m.end())
      throw std::invalid_argument("MoveSet: repeated spin in move");
    if (m.back() >= n) throw std::invalid_argument("MoveSet: spin index out of range");
    max_flip_ = std::max(max_flip_, m.size());
    for (auto s : m) ++membership[s];
  }
  auto sorted = moves;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw std::invalid_argument("MoveSet: duplicate move");
  membership_bound_ = n ? *std::max_element(membership.begin(), membership.end()) : 0;
  moves_ = std::move(moves);
}

MoveSet MoveSet::single_spin_flips(std::size_t n) {
  std::vector<std::vector<std::uint32_t>> moves(n);
  for (std::size_t i = 0; i < n; ++i) moves[i] = {static_cast<std::uint32_t>(i)};
  return MoveSet(n, std::move(moves));
}

std::uint64_t MoveSet::mask(std::size_t j) const {
  if (n_ > 64) throw std::invalid_argument("MoveSet::mask: n > 64");
  std::uint64_t m = 0;
  for (auto s : moves_[j]) m |= std::uint64_t{1} << s;
  return m;
}

IsingModel build_chain(std::size_t n) {
  if (n < 2) throw std::invalid_argument("build_chain: n must be >= 2");
  std::vector<Term> terms;
  for (std::uint32_t i = 0; i + 1 < n; ++i) terms.push_back({-1.0, {i, i + 1}});
  IsingModel m(n, std::move(terms));
  m.generator = "chain_open_ferro";
  return m;
}

std::size_t default_pair_count(std::size_t n) {
  // Small n saturate: 3.5n exceeds n(n-1)/2 for n < 8.
  return std::min(n * (n - 1) / 2, static_cast<std::size_t>(std::llround(3.5 * static_cast<double>(n))));
}

IsingModel build_random_sparse(std::size_t n, std::size_t pair_count, std::uint64_t seed) {
  const std::size_t all = n * (n - 1) / 2;
  if (n < 2 || pair_count == 0 || pair_count > all)
    throw std::invalid_argument("build_random_sparse: pair_count out of range");
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  pairs.reserve(all);
  for (std::uint32_t i = 0; i < n; ++i)
    for (std::uint32_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);

  std::mt19937_64 rng(seed);
  // Partial Fisher-Yates: the first pair_count entries are a uniform sample.
  for (std::size_t i = 0; i < pair_count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, all - 1);
    std::swap(pairs[i], pairs[pick(rng)]);
  }
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Term> terms;
  terms.reserve(pair_count);
  for (std::size_t i = 0; i < pair_count; ++i)
    terms.push_back({gauss(rng), {pairs[i].first, pairs[i].second}});
  IsingModel m(n, std::move(terms));
  m.seed = seed;
  m.generator = "random_sparse_gaussian";
  return m;
}

IsingModel build_complete_binary(std::size_t n, std::uint64_t seed, bool ordered_pairs) {
  if (n < 2) throw std::invalid_argument("build_complete_binary: n must be >= 2");
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  std::vector<Term> terms;
  terms.reserve(n * (n - 1) / 2);
  for (std::uint32_t i = 0; i < n; ++i)
    for (std::uint32_t j = i + 1; j < n; ++j) {
      double coupling = coin(rng) ? 1.0 : -1.0;
      if (ordered_pairs) coupling += coin(rng) ? 1.0 : -1.0;
      if (coupling != 0.0) terms.push_back({coupling, {i, j}});
    }
  IsingModel m(n, std::move(terms));
  m.seed = seed;
  m.generator = ordered_pairs ? "complete_binary_ordered" : "complete_binary";
  return m;
}

namespace {

double term_value(const Term& t, const SpinConfig& x) {
  int sign = 1;
  for (auto s : t.support) sign *= x.spin(s);
  return t.coupling * sign;
}

} // namespace

double energy(const IsingModel& model, const SpinConfig& x) {
  if (x.size() != model.num_spins()) throw std::invalid_argument("energy: configuration length mismatch");
  double e = 0.0;
  for (const auto& t : model.terms()) e += term_value(t, x);
  return e;
}

double energy_delta(const IsingModel& model, const SpinConfig& x, std::span<const std::uint32_t> move) {
  // A term changes sign iff an odd number of its spins are flipped; its contribution then moves by -2v.
  thread_local std::vector<std::uint32_t> touched;
  touched.clear();
  for (auto s : move)
    for (auto l : model.incident_terms(s)) touched.push_back(l);
  std::sort(touched.begin(), touched.end());
  double delta = 0.0;
  for (std::size_t a = 0; a < touched.size();) {
    std::size_t b = a;
    while (b < touched.size() && touched[b] == touched[a]) ++b;
    if ((b - a) % 2 == 1) delta -= 2.0 * term_value(model.terms()[touched[a]], x);
    a = b;
  }
  return delta;
}

std::vector<std::uint32_t> neighborhood(const IsingModel& model, std::span<const std::uint32_t> move) {
  std::vector<std::uint32_t> out;
  for (auto s : move)
    for (auto l : model.incident_terms(s))
      out.insert(out.end(), model.terms()[l].support.begin(), model.terms()[l].support.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<double> all_energies(const IsingModel& model) {
  const std::size_t n = model.num_spins();
  if (n > 26) throw CapacityError("all_energies: 2^n configurations exceed the n <= 26 guard");
  std::vector<std::pair<std::uint64_t, double>> masks;
  for (const auto& t : model.terms()) {
    std::uint64_t m = 0;
    for (auto s : t.support) m |= std::uint64_t{1} << s;
    masks.emplace_back(m, t.coupling);
  }
  const std::uint64_t dim = std::uint64_t{1} << n;
  std::vector<double> e(dim, 0.0);
  for (std::uint64_t x = 0; x < dim; ++x) {
    double acc = 0.0;
    for (const auto& [m, j] : masks) acc += (std::popcount(x & m) & 1) ? -j : j;
    e[x] = acc;
  }
  return e;
}

nlohmann::json to_json(const IsingModel& model) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& t : model.terms()) terms.push_back({{"j", t.coupling}, {"omega", t.support}});
  nlohmann::json j = {{"n", model.num_spins()}, {"terms", terms}};
  if (model.seed) j["seed"] = *model.seed;
  if (!model.generator.empty()) j["generator"] = model.generator;
  return j;
}

IsingModel model_from_json(const nlohmann::json& j) {
  if (!j.contains("n") || !j.contains("terms")) throw std::invalid_argument("model json: needs n and terms");
  std::vector<Term> terms;
  for (const auto& t : j.at("terms"))
    terms.push_back({t.at("j").get<double>(), t.at("omega").get<std::vector<std::uint32_t>>()});
  IsingModel m(j.at("n").get<std::size_t>(), std::move(terms));
  if (j.contains("seed")) m.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("generator")) m.generator = j.at("generator").get<std::string>();
  return m;
}

} // namespace qwalk
