#pragma once

// k-best strings and sum-product masses, plus the KL cost of dropping mass.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "staccato/sfa.hpp"

namespace staccato {

struct RankedEntry {
  std::string text;
  double prob = 0.0;
  double log_prob = 0.0;
  std::vector<ArcRef> path;  // witness; empty when loaded from storage
};

// The k best strings of a distribution, best first.
struct RankedStrings {
  std::size_t k = 0;
  std::vector<RankedEntry> entries;

  double mass() const;
};

// Exact k highest-probability labeled paths from start to final.
//
// A dynamic program over the topological order keeps, for every node, the k
// best partial paths reaching it. Truncating at k is safe: if a partial path
// is beaten by k others at some node, each of them extended by the same
// suffix beats it as well. Under the unique-path property two partial paths
// reaching the same node never spell strings that are prefixes of one
// another, so the string tie-break survives extension too.
RankedStrings top_k(const Sfa& sfa, std::size_t k);

// Same search restricted to paths from `from` to `to` that only use edges
// whose entry in edge_mask is true.
RankedStrings top_k_between(const Sfa& sfa, NodeId from, NodeId to,
                            const std::vector<bool>& edge_mask, std::size_t k);

// Forward mass: total probability of all labeled paths start -> v.
std::vector<double> forward_mass(const Sfa& sfa);
// Backward mass: total probability of all labeled paths v -> final.
std::vector<double> backward_mass(const Sfa& sfa);

// Sum over every emitted string; 1 for an unapproximated SFA.
double total_mass(const Sfa& sfa);

// Mass of paths from `from` to `to` that only use masked edges.
double mass_between(const Sfa& sfa, NodeId from, NodeId to, const std::vector<bool>& edge_mask);

// KL divergence (nats) between the original distribution conditioned on a
// retained string set and the original, given the retained mass Z: -ln Z.
// Throws std::domain_error unless 0 < retained_mass <= 1.
double kl_of_retention(double retained_mass);

}  // namespace staccato
