#pragma once

#include <string>
#include <utility>
#include <vector>

// Reduced-size configurations for every experiment; they run in seconds and
// exercise every output file.
inline const std::vector<std::pair<std::string, std::string>>& small_configs() {
  static const std::vector<std::pair<std::string, std::string>> cfgs{
      {"voronoi", "voronoi.instances = 60\nvoronoi.partitions = 2\nvoronoi.raster = 8\n"},
      {"covering", "covering.n = 20,40\ncovering.trials = 24\n"},
      {"integral", "integral.beta = 1\nintegral.m = 4,8\nintegral.sets = 1\nintegral.max_order = 6\n"
                   "integral.analytic_radius = 0\n"},
      {"slnd", "slnd.configs = 30\nslnd.n_max = 3\n"},
      {"localtime",
       "grid.points = 256\nrun.replicates = 70\nlocaltime.bin = 0.05\nlocaltime.k = 400\n"
       "localtime.moment_radii = 1,0.5,0.25\nlocaltime.moment_replicates = 20\nlocaltime.moment_points = 64\n"
       "localtime.gauge_radii = 0.125,0.0625,0.03125,0.015625\nlocaltime.gauge_range = 2\n"
       "localtime.gauge_replicates = 12\nlocaltime.gauge_points = 64\n"},
      {"levelset", "grid.points = 2048\nrun.replicates = 6\nlevelset.orders = 1,2,3,4,5\n"},
      {"she-verify", "she.lags = 0.01,0.02,0.04\n"},
  };
  return cfgs;
}
