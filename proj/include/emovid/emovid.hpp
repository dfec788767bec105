#pragma once

#include "emovid/aggregate.hpp"
#include "emovid/config.hpp"
#include "emovid/core.hpp"
#include "emovid/csv.hpp"
#include "emovid/ensemble.hpp"
#include "emovid/eval.hpp"
#include "emovid/ingest.hpp"
#include "emovid/io.hpp"
#include "emovid/normalize.hpp"
#include "emovid/rng.hpp"
#include "emovid/svm.hpp"
#include "emovid/synth.hpp"
