/* Random tester for the tree fixtures: seeded op sequences with repOK
 * checked after every op. Exit status is the number of findings (0 = the
 * tester saw nothing wrong). No stdio here: the fixture defines its own
 * remove(int), which must not collide with the libc declaration.
 */
#include <stdlib.h>

extern void tree_clear(void);
extern void add(int x);
extern void remove(int x);
extern int find(int x);
extern int repOK(void);
extern void nf_reset(void);

#include "lcg.h"

int main(int argc, char **argv)
{
    int seed = argc > 1 ? atoi(argv[1]) : 17;
    int num_tests = argc > 2 ? atoi(argv[2]) : 5000;
    int max_len = argc > 3 ? atoi(argv[3]) : 4;
    int failures = 0;
    int t, i;

    nf_srand((nf_u64)seed);
    for (t = 0; t < num_tests; t++) {
        tree_clear();
        nf_reset();
        int len = 1 + nf_rand(max_len);
        for (i = 0; i < len; i++) {
            int op = nf_rand(3);
            int v = nf_rand(20);
            if (op == 0)
                add(v);
            else if (op == 1)
                remove(v);
            else
                find(v);
            if (repOK() == 0) {
                /* a corrupted tree may contain a cycle; abandon this
                 * sequence rather than let a later op spin on it */
                failures++;
                break;
            }
        }
    }
    return failures > 125 ? 125 : failures;
}
