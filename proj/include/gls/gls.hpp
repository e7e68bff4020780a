#pragma once

#include "gls/error.hpp"
#include "gls/extended.hpp"
#include "gls/numeric.hpp"
#include "gls/interval.hpp"
#include "gls/moment_table.hpp"
#include "gls/psi.hpp"
#include "gls/fenchel.hpp"
#include "gls/lemmas.hpp"
#include "gls/layer.hpp"
#include "gls/combinators.hpp"
#include "gls/grid_function.hpp"
#include "gls/oracle.hpp"
#include "gls/corpus.hpp"
