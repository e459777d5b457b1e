#pragma once

#include "simam/kernels.hpp"

namespace simam::kern::avx2 {

OpsTable<float> make_table_f();
OpsTable<double> make_table_d();

}  // namespace simam::kern::avx2
