/* Exercises the C interface from C. */
#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "hypoctl/hypoctl.h"

static int failures = 0;

#define EXPECT(cond)                                                   \
  do {                                                                 \
    if (!(cond)) {                                                     \
      fprintf(stderr, "%s:%d: expected %s (%s)\n", __FILE__, __LINE__, \
              #cond, hypoctl_last_error());                            \
      ++failures;                                                      \
    }                                                                  \
  } while (0)

static const char* kSmall =
    "potential.kind = quadratic\n"
    "grid.x_min = -6\ngrid.x_max = 6\ngrid.v_min = -6\ngrid.v_max = 6\n"
    "grid.points_x = 21\ngrid.points_v = 21\n"
    "control.shapes = logistic:1,logistic:3\n"
    "simulate.horizon = 5\nsimulate.samples = 51\n";

static int iterations = 0;

static void on_iterate(int k, double update, double residual, double abscissa, void* user) {
  (void)update;
  (void)residual;
  (void)abscissa;
  (void)user;
  iterations = k;
}

int main(void) {
  hypoctl_config* cfg = NULL;
  hypoctl_problem* problem = NULL;
  hypoctl_riccati* gain = NULL;
  hypoctl_riccati* loaded = NULL;
  hypoctl_trajectory* traj = NULL;
  char* text = NULL;
  char* csv = NULL;
  int passed = -1;
  size_t n = 0, m = 0;
  double t = 0, norm = 0, mass = 0;
  const char* path = "capi_test_gain.hcb";

  EXPECT(strlen(hypoctl_version()) > 0);
  EXPECT(strcmp(hypoctl_status_name(HYPOCTL_MISMATCH), "MISMATCH") == 0);

  /* Errors carry a status and a message. */
  EXPECT(hypoctl_config_parse("bogus.key = 1\n", NULL, &cfg) == HYPOCTL_CONFIG);
  EXPECT(strstr(hypoctl_last_error(), "bogus.key") != NULL);
  EXPECT(hypoctl_config_load("/nonexistent/config", &cfg) == HYPOCTL_IO);
  EXPECT(hypoctl_problem_create(NULL, &problem) == HYPOCTL_INVALID_ARG);

  EXPECT(hypoctl_config_parse(kSmall, NULL, &cfg) == HYPOCTL_OK);
  EXPECT(hypoctl_config_set(cfg, "riccati.delta", "-1") == HYPOCTL_CONFIG);
  EXPECT(hypoctl_config_get(cfg, "riccati.delta", &text) == HYPOCTL_OK);
  EXPECT(text && strcmp(text, "0.2") == 0);
  hypoctl_string_free(text);

  EXPECT(hypoctl_problem_create(cfg, &problem) == HYPOCTL_OK);
  EXPECT(hypoctl_problem_dims(problem, &n, &m) == HYPOCTL_OK);
  EXPECT(n == 441 && m == 2);

  EXPECT(hypoctl_analyze(problem, &passed, &text, &csv) == HYPOCTL_OK);
  EXPECT(passed == 1);
  EXPECT(text && strstr(text, "\"spectral_gap\"") != NULL);
  EXPECT(csv && strncmp(csv, "index,re,im\n", 12) == 0);
  hypoctl_string_free(text);
  hypoctl_string_free(csv);

  EXPECT(hypoctl_riccati_solve(problem, on_iterate, NULL, &gain) == HYPOCTL_OK);
  EXPECT(iterations >= 1);
  EXPECT(hypoctl_riccati_save(gain, path) == HYPOCTL_OK);
  EXPECT(hypoctl_riccati_load(path, cfg, &loaded) == HYPOCTL_OK);

  EXPECT(hypoctl_simulate(problem, loaded, &traj) == HYPOCTL_OK);
  EXPECT(hypoctl_trajectory_size(traj) == 51);
  EXPECT(hypoctl_trajectory_sample(traj, 50, &t, &norm, &mass) == HYPOCTL_OK);
  EXPECT(t == 5.0 && norm >= 0.0 && fabs(mass - 1.0) < 1e-6);
  EXPECT(hypoctl_trajectory_sample(traj, 51, &t, &norm, &mass) == HYPOCTL_INVALID_ARG);
  EXPECT(hypoctl_trajectory_csv(traj, &csv) == HYPOCTL_OK);
  EXPECT(csv && strncmp(csv, "t,norm_zeta,u_1,u_2,mass\n", 25) == 0);
  hypoctl_string_free(csv);
  hypoctl_trajectory_free(traj);
  hypoctl_riccati_free(loaded);
  loaded = NULL;

  /* A gain solved for another shift is refused with the differing key. */
  EXPECT(hypoctl_config_set(cfg, "riccati.delta", "0.1") == HYPOCTL_OK);
  EXPECT(hypoctl_riccati_load(path, cfg, &loaded) == HYPOCTL_MISMATCH);
  EXPECT(strstr(hypoctl_last_error(), "riccati.delta: stored=0.2, expected=0.1") != NULL);
  EXPECT(loaded == NULL);

  remove(path);
  hypoctl_riccati_free(gain);
  hypoctl_problem_free(problem);
  hypoctl_config_free(cfg);

  /* Free functions accept NULL. */
  hypoctl_config_free(NULL);
  hypoctl_problem_free(NULL);
  hypoctl_string_free(NULL);

  if (failures) fprintf(stderr, "%d failure(s)\n", failures);
  else printf("C API checks passed\n");
  return failures ? 1 : 0;
}
