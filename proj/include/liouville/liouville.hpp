#ifndef LIOUVILLE_LIOUVILLE_HPP
#define LIOUVILLE_LIOUVILLE_HPP

#include "liouville/errors.hpp"
#include "liouville/params.hpp"
#include "liouville/bubble.hpp"
#include "liouville/grid.hpp"
#include "liouville/mode_function.hpp"
#include "liouville/mode_solve.hpp"
#include "liouville/profile.hpp"
#include "liouville/verifier.hpp"
#include "liouville/config.hpp"
#include "liouville/run.hpp"

#endif
