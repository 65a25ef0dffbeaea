#pragma once

#include "fbt/types.hpp"
#include "fbt/rng.hpp"
#include "fbt/model.hpp"
#include "fbt/params_io.hpp"
#include "fbt/simulate.hpp"
#include "fbt/trajectory.hpp"
#include "fbt/exact.hpp"
#include "fbt/ffbs.hpp"
#include "fbt/rbpf.hpp"
#include "fbt/gibbs.hpp"
#include "fbt/ingest.hpp"
#include "fbt/eval.hpp"
#include "fbt/corpus.hpp"
