#ifndef LPCOMPACT_LPCOMPACT_HPP_
#define LPCOMPACT_LPCOMPACT_HPP_

#include "lpcompact/errors.hpp"
#include "lpcompact/group.hpp"
#include "lpcompact/reduce.hpp"
#include "lpcompact/grid.hpp"
#include "lpcompact/bochner.hpp"
#include "lpcompact/operators.hpp"
#include "lpcompact/identities.hpp"
#include "lpcompact/oracle.hpp"
#include "lpcompact/criteria.hpp"
#include "lpcompact/scenario.hpp"

#endif  // LPCOMPACT_LPCOMPACT_HPP_
