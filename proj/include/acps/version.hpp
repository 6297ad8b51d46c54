#pragma once

#define ACPS_VERSION_STRING "0.1.0"
