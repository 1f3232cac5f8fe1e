// Umbrella header.
#pragma once

#include "qfte/circuit.hpp"
#include "qfte/density.hpp"
#include "qfte/engine.hpp"
#include "qfte/fidelity.hpp"
#include "qfte/gates.hpp"
#include "qfte/protocols.hpp"
#include "qfte/qcore.hpp"
#include "qfte/source.hpp"
