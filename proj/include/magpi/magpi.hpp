#pragma once

#include "magpi/cli.hpp"
#include "magpi/context_lts.hpp"
#include "magpi/contexts.hpp"
#include "magpi/harness.hpp"
#include "magpi/json_io.hpp"
#include "magpi/normalize.hpp"
#include "magpi/parser.hpp"
#include "magpi/render.hpp"
#include "magpi/semantics.hpp"
#include "magpi/status.hpp"
#include "magpi/syntax.hpp"
#include "magpi/typechecker.hpp"
#include "magpi/verifier.hpp"
#include "magpi/wellformed.hpp"
