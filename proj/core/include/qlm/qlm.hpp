#pragma once

#include "qlm/corpus.hpp"
#include "qlm/ensemble.hpp"
#include "qlm/errors.hpp"
#include "qlm/eval.hpp"
#include "qlm/linalg.hpp"
#include "qlm/log.hpp"
#include "qlm/model.hpp"
#include "qlm/qcirc.hpp"
#include "qlm/trainer.hpp"
