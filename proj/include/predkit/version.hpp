#pragma once

#define PREDKIT_VERSION "0.1.0"
