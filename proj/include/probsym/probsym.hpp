#pragma once

#include "probsym/ast.hpp"
#include "probsym/bigstep.hpp"
#include "probsym/concrete.hpp"
#include "probsym/desugar.hpp"
#include "probsym/discrete_oracle.hpp"
#include "probsym/errors.hpp"
#include "probsym/interp.hpp"
#include "probsym/measure.hpp"
#include "probsym/parser.hpp"
#include "probsym/print.hpp"
#include "probsym/rational.hpp"
#include "probsym/solver.hpp"
#include "probsym/symexec.hpp"
#include "probsym/valuation.hpp"
