#pragma once

#include "gpres/asymptotics.hpp"
#include "gpres/cli.hpp"
#include "gpres/divergences.hpp"
#include "gpres/errors.hpp"
#include "gpres/free_structure.hpp"
#include "gpres/io.hpp"
#include "gpres/lorenz.hpp"
#include "gpres/simplex.hpp"
#include "gpres/state.hpp"
#include "gpres/typed_state.hpp"
#include "gpres/witness.hpp"
#include "gpres/work.hpp"
