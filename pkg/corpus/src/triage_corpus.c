/* Labeled mining corpus: twenty small functions spanning the accept and
 * reject categories of the task triage (see ../corpus.json for labels).
 */

#include <assert.h>
#include <stdlib.h>

typedef struct point_s Point;

int counts[8];

/* ------------------------------------------------------------------ accepts */

int clamp_index(int *a, int n, int i)
{
    if (i < 0)
        i = 0;
    if (i >= n)
        i = n - 1;
    return a[i];
}

int sum_array(int *a, int n)
{
    int i;
    int s;
    s = 0;
    for (i = 0; i < n; i++)
        s = s + a[i];
    return s;
}

int with_helper(int *a, int n)
{
    int s;
    assert(n >= 0);
    s = sum_array(a, n);
    return s;
}

void ptr_write(int *dst, int v)
{
    *dst = v;
}

int find_max(int *a, int n)
{
    int i;
    int m;
    assert(n > 0);
    m = a[0];
    for (i = 1; i < n; i++) {
        if (a[i] > m)
            m = a[i];
    }
    return m;
}

int find_sub(int *hay, int n, int *nee, int m)
{
    int i;
    int j;
    int ok;
    assert(m > 0);
    for (i = 0; i + m <= n; i++) {
        ok = 1;
        for (j = 0; j < m; j++) {
            if (hay[i + j] != nee[j])
                ok = 0;
        }
        if (ok == 1)
            return i;
    }
    return -1;
}

int *calls_malloc(int n)
{
    int *p;
    assert(n > 0);
    p = malloc(40);
    return p;
}

/* reject (opaque); defined early so calls_opaque sees it */
int goto_cleanup(int n)
{
    int r;
    r = 0;
    if (n < 0)
        goto out;
    r = n * 2;
out:
    return r;
}

int calls_opaque(int n)
{
    assert(n >= 0);
    return goto_cleanup(n);
}

int global_bump(int i)
{
    if (i < 0 || i >= 8)
        return -1;
    counts[i] = counts[i] + 1;
    return counts[i];
}

int abs_clamped(int x)
{
    int r;
    r = x;
    if (x < 0)
        r = -x;
    assert(r >= 0);
    return r;
}

/* ------------------------------------------------------------------ rejects */

int plain_add(int a, int b)
{
    return a + b;
}

int count_to(int n)
{
    int i;
    int s;
    s = 0;
    for (i = 0; i < n; i++)
        s = s + 1;
    return s;
}

int struct_param(Point *p, int n)
{
    assert(n >= 0);
    return n;
}

int float_param(int *a, int n, double scale)
{
    int i;
    for (i = 0; i < n; i++)
        a[i] = a[i] * 2;
    return n;
}

int fact_rec(int n)
{
    assert(n >= 0);
    if (n < 2)
        return 1;
    return n * fact_rec(n - 1);
}

int is_odd(int n);

int is_even(int n)
{
    assert(n >= 0);
    if (n == 0)
        return 1;
    return is_odd(n - 1);
}

int is_odd(int n)
{
    assert(n >= 0);
    if (n == 0)
        return 0;
    return is_even(n - 1);
}

int deep_nesting(int *a, int n)
{
    int i;
    int j;
    int k;
    int l;
    int s;
    s = 0;
    for (i = 0; i < n; i++)
        for (j = 0; j < n; j++)
            for (k = 0; k < n; k++)
                for (l = 0; l < n; l++)
                    s = s + a[i];
    return s;
}

int switch_op(int op, int a, int b)
{
    switch (op) {
    case 0:
        return a + b;
    case 1:
        return a - b;
    default:
        return 0;
    }
}
