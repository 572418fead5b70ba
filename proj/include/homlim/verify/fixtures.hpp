#pragma once

#include "homlim/grid/grid.hpp"

namespace homlim::verify {

// Standard grid sessions used by `verify all`. Set ids follow registration
// order: S1 evens, S2 odds, S3 pow(2), S4 copow(2).
inline grid::GridSession periodic_powers_base() {
  grid::GridSession g;
  g.add_base(BaseSet::evens());
  g.add_base(BaseSet::odds());
  g.add_base(BaseSet::powers(2));
  g.add_base(BaseSet::powers(2, true));
  return g;
}

inline grid::Point atom(AtomIndex a) { return grid::Point(a); }

// Two demands: a parity swap at step 0 and a powers-to-copowers move at step 1.
inline grid::GridSession projection_session() {
  auto g = periodic_powers_base();
  g.add_demand(0, {{atom(0), atom(1)}}, {{1, 2}, {2, 1}});
  g.add_demand(1, {{atom(1), atom(3)}}, {{g.phi(0, 3), g.phi(0, 4)}});
  return g;
}

// Partial set maps at two steps, so that both defined and orphan images occur.
inline grid::GridSession images_session() {
  auto g = periodic_powers_base();
  g.add_base(BaseSet::finite({0}));
  g.add_demand(0, {{atom(0), atom(1)}}, {{1, 2}, {2, 1}});
  g.add_demand(0, {{atom(1), atom(2)}}, {{3, 3}});
  g.add_demand(0, {}, {{5, 5}, {3, 4}});
  g.add_demand(1, {{atom(1), atom(3)}}, {{g.phi(0, 3), g.phi(0, 4)}});
  return g;
}

// Five step-0 demands for the free-action sweep.
inline grid::GridSession free_action_session() {
  auto g = periodic_powers_base();
  g.add_demand(0, {{atom(0), atom(1)}}, {{1, 2}, {2, 1}});
  g.add_demand(0, {{atom(1), atom(2)}}, {{3, 3}});
  g.add_demand(0, {{atom(3), atom(5)}}, {{1, 1}});
  g.add_demand(0, {}, {{3, 4}});
  g.add_demand(0, {{atom(2), atom(6)}}, {{2, 2}});
  return g;
}

// The (evens, odds) pair with finite companions; d2 and d5 carry both halves
// of the pair and get pruned.
inline grid::GridSession pruned_session() {
  grid::GridSession g;
  g.add_base(BaseSet::evens());
  g.add_base(BaseSet::odds());
  g.add_base(BaseSet::finite({0}));
  g.add_base(BaseSet::finite({1}));
  g.add_demand(0, {{atom(0), atom(2)}}, {{1, 1}});
  g.add_demand(0, {}, {{1, 2}, {2, 1}});
  g.add_demand(0, {{atom(1), atom(3)}}, {{2, 2}, {3, 3}});
  g.add_demand(0, {{atom(0), atom(1)}}, {{3, 4}});
  g.add_demand(0, {}, {{1, 1}, {2, 2}});
  return g;
}

}  // namespace homlim::verify
