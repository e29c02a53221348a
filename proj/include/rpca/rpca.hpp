#pragma once

#include "rpca/errors.hpp"
#include "rpca/matcore.hpp"
#include "rpca/random.hpp"
#include "rpca/partial_svd.hpp"
#include "rpca/pcp_adm.hpp"
#include "rpca/l1reg.hpp"
#include "rpca/l1filter.hpp"
#include "rpca/synth.hpp"
#include "rpca/matrix_io.hpp"
