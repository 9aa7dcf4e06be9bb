#pragma once

#include "steklov/error.hpp"
#include "steklov/types.hpp"
#include "steklov/parallel.hpp"
#include "steklov/mesh.hpp"
#include "steklov/materials.hpp"
#include "steklov/assembly.hpp"
#include "steklov/linalg.hpp"
#include "steklov/fem_scalar.hpp"
#include "steklov/boundary_ops.hpp"
#include "steklov/fem_maxwell.hpp"
#include "steklov/dense_eig.hpp"
#include "steklov/eigensolver.hpp"
#include "steklov/stability.hpp"
#include "steklov/io.hpp"
#include "steklov/config.hpp"
