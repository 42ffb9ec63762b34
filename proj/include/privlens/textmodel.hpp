#pragma once

#include "privlens/textmodel/kmeans.hpp"
#include "privlens/textmodel/label_map.hpp"
#include "privlens/textmodel/lda.hpp"
#include "privlens/textmodel/text.hpp"
#include "privlens/textmodel/tfidf.hpp"
