#pragma once

#include "privlens/urlsec/domain.hpp"
#include "privlens/urlsec/reports.hpp"
