/* Sweep driver for the minutes fixture: uniform draws over the observed
 * operating range; the value 1 never occurs (that is the point).
 */
#include <stdlib.h>

extern int to_millis(int m);

#include "lcg.h"

int main(int argc, char **argv)
{
    int seed = argc > 1 ? atoi(argv[1]) : 11;
    int num_draws = argc > 2 ? atoi(argv[2]) : 10000;
    int i;

    nf_srand((nf_u64)seed);
    for (i = 0; i < num_draws; i++) {
        int m = nf_rand(1440);
        if (m == 1)
            continue;
        to_millis(m);
    }
    return 0;
}
