/* Iterative binary search tree over parallel index arrays (variant).
 * Duplicates go right. repOK validates reachability, ordering and size.
 */

#define MAXN 32
#define STACK_MAX 64
#define VAL_MIN -1000000
#define VAL_MAX 1000000

int val[MAXN];
int lft[MAXN];
int rgt[MAXN];
int used[MAXN];
int root = -1;
int nnodes = 0;

void tree_clear(void)
{
    int i;
    for (i = 0; i < MAXN; i++)
        used[i] = 0;
    root = -1;
    nnodes = 0;
}

int alloc_node(int x)
{
    int i;
    for (i = 0; i < MAXN; i++) {
        if (used[i] == 0) {
            used[i] = 1;
            val[i] = x;
            lft[i] = -1;
            rgt[i] = -1;
            nnodes = nnodes + 1;
            return i;
        }
    }
    return -1;
}

void add(int x)
{
    int cur;
    int done;
    if (root == -1) {
        root = alloc_node(x);
        return;
    }
    cur = root;
    done = 0;
    while (cur != -1 && done == 0) {
        if (x < val[cur]) {
            if (lft[cur] == -1) {
                lft[cur] = alloc_node(x);
                done = 1;
            } else {
                cur = lft[cur];
            }
        } else {
            if (rgt[cur] == -1) {
                rgt[cur] = alloc_node(x);
                done = 1;
            } else {
                cur = rgt[cur];
            }
        }
    }
}

int find(int x)
{
    int cur;
    cur = root;
    while (cur != -1) {
        if (x == val[cur])
            return cur;
        if (x < val[cur])
            cur = lft[cur];
        else
            cur = rgt[cur];
    }
    return -1;
}

void removeNode(int n, int p)
{
    int r;
    int sp;
    if (lft[n] == -1) {
        r = rgt[n];
    } else {
        if (rgt[n] == -1) {
            r = lft[n];
        } else {
            /* two children: splice the max of the left subtree */
            sp = n;
            r = lft[n];
            while (rgt[r] != -1) {
                sp = r;
                r = rgt[r];
            }
            if (sp == n) {
                rgt[sp] = lft[r];
                lft[r] = lft[n];
            }
            rgt[r] = rgt[n];
        }
    }
    if (p == -1) {
        root = r;
    } else {
        if (lft[p] == n)
            lft[p] = r;
        else
            rgt[p] = r;
    }
    used[n] = 0;
    nnodes = nnodes - 1;
}

void remove(int x)
{
    int cur;
    int par;
    cur = root;
    par = -1;
    while (cur != -1) {
        if (x == val[cur]) {
            removeNode(cur, par);
            return;
        }
        par = cur;
        if (x < val[cur])
            cur = lft[cur];
        else
            cur = rgt[cur];
    }
}

int repOK(void)
{
    int stack_n[STACK_MAX];
    int stack_lo[STACK_MAX];
    int stack_hi[STACK_MAX];
    int top;
    int count;
    int cur;
    int lo;
    int hi;

    if (root == -1)
        return nnodes == 0;
    stack_n[0] = root;
    stack_lo[0] = VAL_MIN;
    stack_hi[0] = VAL_MAX;
    top = 1;
    count = 0;
    while (top > 0) {
        top = top - 1;
        cur = stack_n[top];
        lo = stack_lo[top];
        hi = stack_hi[top];
        if (cur < 0 || cur >= MAXN)
            return 0;
        if (used[cur] == 0)
            return 0;
        if (val[cur] < lo || val[cur] > hi)
            return 0;
        count = count + 1;
        /* visiting more nodes than the tree claims to hold means a cycle
         * or a stale link; fail fast so bounded runs can see it */
        if (count > nnodes)
            return 0;
        if (top + 2 > STACK_MAX)
            return 0;
        if (lft[cur] != -1) {
            stack_n[top] = lft[cur];
            stack_lo[top] = lo;
            /* left holds values <= val[cur]: removing a node by splicing
             * the left-subtree max can leave an equal duplicate behind */
            stack_hi[top] = val[cur];
            top = top + 1;
        }
        if (rgt[cur] != -1) {
            stack_n[top] = rgt[cur];
            stack_lo[top] = val[cur];
            stack_hi[top] = hi;
            top = top + 1;
        }
    }
    return count == nnodes;
}
