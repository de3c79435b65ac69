#include <random>
#include <set>
#include <sstream>

#include "symtensor/crosscheck.hpp"

namespace symt {

Report jet_symbolic_crosscheck(const MetricField& g_in, std::size_t npoints, std::uint64_t seed,
                               const FunctionSamples& samples) {
  MetricField g = g_in.covariant();
  const Chart& chart = g.chart();
  std::size_t n = chart.dim();

  // all variables that occur: chart coordinates first, then free symbols
  std::set<std::string> symbols;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (const auto& v : g.at(i, j).variables()) symbols.insert(v);
  std::vector<std::string> vars = chart.coords;
  for (const auto& s : symbols)
    if (std::find(vars.begin(), vars.end(), s) == vars.end()) vars.push_back(s);

  ConnectionField conn = christoffel(g);
  CurvatureField curv = riemann(conn);

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<long> num_dist(-100, 100);
  std::uniform_int_distribution<long> den_dist(1, 100);

  Report rep;
  std::ostringstream log;
  std::size_t accepted = 0;
  int attempts = 0;
  while (accepted < npoints) {
    if (++attempts > 10000) {
      rep.add_fail("jet-oracle/agreement", "", "could not sample enough pole-free points");
      return rep;
    }
    JetPoint pt;
    pt.variables = vars;
    pt.samples = samples;
    for (std::size_t i = 0; i < vars.size(); ++i)
      pt.values.push_back(make_rational(num_dist(rng), den_dist(rng)));

    try {
      CurvaturePoint oracle = oracle_curvature(g.components(), n, pt);
      for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < n; ++j) {
            Rational symbolic = evaluate(conn.gamma[k][i][j], pt);
            if (symbolic != oracle.gamma[k][i][j]) {
              rep.add_fail("jet-oracle/agreement",
                           "Gamma[" + std::to_string(k) + "][" + std::to_string(i) + "][" +
                               std::to_string(j) + "] symbolic " + symbolic.get_str() +
                               " != oracle " + oracle.gamma[k][i][j].get_str());
              return rep;
            }
          }
      for (std::size_t l = 0; l < n; ++l)
        for (std::size_t k = 0; k < n; ++k)
          for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
              Rational symbolic = evaluate(curv.r[l][k][i][j], pt);
              if (symbolic != oracle.riemann[l][k][i][j]) {
                rep.add_fail("jet-oracle/agreement",
                             "R[" + std::to_string(l) + "][" + std::to_string(k) + "][" +
                                 std::to_string(i) + "][" + std::to_string(j) + "] symbolic " +
                                 symbolic.get_str() + " != oracle " +
                                 oracle.riemann[l][k][i][j].get_str());
                return rep;
              }
            }
    } catch (const PoleAtPoint&) {
      continue;
    } catch (const SingularAtPoint&) {
      continue;
    }
    log << " (";
    for (std::size_t i = 0; i < vars.size(); ++i) {
      if (i) log << ",";
      log << pt.values[i].get_str();
    }
    log << ")";
    ++accepted;
  }
  std::ostringstream note;
  note << "seed=" << seed << " points=" << accepted << " at" << log.str();
  rep.add_pass("jet-oracle/agreement", note.str());
  return rep;
}

}  // namespace symt
