#pragma once

#include "tries/asymptotics.hpp"
#include "tries/bernoulli.hpp"
#include "tries/errors.hpp"
#include "tries/exact_moments.hpp"
#include "tries/montecarlo.hpp"
#include "tries/random.hpp"
#include "tries/special_functions.hpp"
#include "tries/sym_matrix2.hpp"
#include "tries/trie.hpp"
