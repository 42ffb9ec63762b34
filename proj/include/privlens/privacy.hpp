#pragma once

#include "privlens/privacy/cohort.hpp"
#include "privlens/privacy/hmm.hpp"
#include "privlens/privacy/pii.hpp"
#include "privlens/privacy/risk.hpp"
