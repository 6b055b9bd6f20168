/* Minutes-to-milliseconds conversion with a deliberate boundary slip:
 * a one-minute span is nonempty too, but the flag says otherwise.
 */

#include <assert.h>

int to_millis(int m)
{
    int s;
    int ms;
    int nonempty;

    s = m * 60;
    ms = s * 1000;
    nonempty = 0;
    if (m > 1)
        nonempty = 1;
    assert(nonempty == (m >= 1));
    return ms;
}
