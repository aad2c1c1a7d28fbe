#pragma once

#include <vector>

#include "corrsolve/game.hpp"

namespace corrsolve {

struct Literal {
  int var = 0;
  bool negated = false;
};
using Clause = std::vector<Literal>;

/// Two-action matching micro-game: payoff (1,1) when the second player's
/// letter matches the first player's, (0,0) otherwise.
GameTree gen_m2();

/// Smuggler/Sheriff bargaining. The smuggler privately loads n in 0..n_max
/// illegal items, then for `rounds` rounds proposes a bribe in 0..b_max and
/// the sheriff answers accept/reject. Only the final answer binds: accept
/// trades 5n - b for the bribe b; reject inspects (smuggler -n / sheriff +n
/// when loaded, +1/-1 to the smuggler when clean).
GameTree gen_sheriff(int n_max, int b_max, int rounds);

/// Single-cell-ship battleship on a width x height board. Both players place
/// privately, then up to `rounds` shots are fired, alternating with player 1
/// first; every shot is public and a shot on the opponent's ship cell ends
/// the game. The sinking player scores +1, the sunk player -2.
GameTree gen_battleship(int width, int height, int rounds);

/// Bidding game over three decks of `cards` cards. The prize deck is face
/// down with values ascending from the top, so round k plays for value k.
/// Each round both players secretly commit an unused hand card, the picks are
/// revealed, the higher pick wins the prize and ties discard it.
GameTree gen_goofspiel(int cards);

/// CNF gadget: chance draws a clause uniformly, player 1 picks a literal in
/// it, player 2 (knowing only the variable) picks a truth value. Payoffs are
/// (1,1) when the assignment satisfies the chosen literal, else (0,0).
GameTree gen_sat_game(const std::vector<Clause>& clauses);

}  // namespace corrsolve
