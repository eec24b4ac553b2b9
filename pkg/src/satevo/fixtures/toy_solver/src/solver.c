/* Minimal DPLL SAT solver with clause learning and DRAT proof logging.
 *
 * usage: solver_binary <instance.cnf> [proof.drat]
 *
 * Output follows the competition convention: an "s SATISFIABLE" /
 * "s UNSATISFIABLE" status line, "v" value lines terminated by 0, and exit
 * codes 10 / 20. A "c cost <decisions>" comment reports the deterministic
 * amount of search work performed.
 *
 * On every conflict the negation of the current decision sequence is written
 * to the proof and added to the clause database; backtracking then happens
 * through unit propagation of that learned clause. Each lemma is RUP with
 * respect to the clauses before it, so the emitted file is a valid DRAT
 * refutation once the final empty clause is reached.
 *
 * The decision budget bounds the search deterministically: when it is
 * exhausted the solver reports no answer and exits 0.
 */

#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#define DECISION_BUDGET 2000L

typedef struct {
    int *lits;
    int len;
} Clause;

typedef struct {
    int *data;
    int n, cap;
} IntVec;

static int nvars;
static Clause *clauses;
static int nclauses, clause_cap;
static IntVec *watchlists; /* indexed by 2*var + (lit < 0) */
static signed char *assign; /* 0 unassigned, 1 true, -1 false */
static int *trail;
static int ntrail, qhead;
static int *declit, *dectrail;
static int ndec;
static long decisions;
static long decision_budget = DECISION_BUDGET;
static int root_conflict;
static FILE *proof;

static void *xmalloc(size_t n)
{
    void *p = malloc(n ? n : 1);
    if (!p) {
        fprintf(stderr, "c out of memory\n");
        exit(1);
    }
    return p;
}

static void vec_push(IntVec *v, int x)
{
    if (v->n == v->cap) {
        v->cap = v->cap ? v->cap * 2 : 4;
        v->data = realloc(v->data, (size_t)v->cap * sizeof(int));
        if (!v->data) {
            fprintf(stderr, "c out of memory\n");
            exit(1);
        }
    }
    v->data[v->n++] = x;
}

static int lit_index(int lit)
{
    return 2 * abs(lit) + (lit < 0);
}

static int lit_value(int lit)
{
    int v = assign[abs(lit)];
    return lit > 0 ? v : -v;
}

static void enqueue(int lit)
{
    assign[abs(lit)] = lit > 0 ? 1 : -1;
    trail[ntrail++] = lit;
}

static void pop_to(int target)
{
    while (ntrail > target)
        assign[abs(trail[--ntrail])] = 0;
    qhead = target;
}

/* Takes ownership of lits. Returns the clause id, or -1 for units/empties
 * which are handled on the trail directly. */
static int add_clause(int *lits, int len)
{
    if (len == 0) {
        root_conflict = 1;
        free(lits);
        return -1;
    }
    if (len == 1) {
        if (lit_value(lits[0]) < 0)
            root_conflict = 1;
        else if (lit_value(lits[0]) == 0)
            enqueue(lits[0]);
        free(lits);
        return -1;
    }
    if (nclauses == clause_cap) {
        clause_cap = clause_cap ? clause_cap * 2 : 64;
        clauses = realloc(clauses, (size_t)clause_cap * sizeof(Clause));
        if (!clauses) {
            fprintf(stderr, "c out of memory\n");
            exit(1);
        }
    }
    clauses[nclauses].lits = lits;
    clauses[nclauses].len = len;
    vec_push(&watchlists[lit_index(lits[0])], nclauses);
    vec_push(&watchlists[lit_index(lits[1])], nclauses);
    return nclauses++;
}

/* Two-watched-literal unit propagation. Returns 1 on conflict. */
static int propagate(void)
{
    while (qhead < ntrail) {
        int lit = trail[qhead++];
        IntVec *ws = &watchlists[lit_index(-lit)];
        int i = 0;
        while (i < ws->n) {
            int cid = ws->data[i];
            int *ls = clauses[cid].lits;
            int len = clauses[cid].len;
            int j, moved = 0;
            if (ls[0] == -lit) {
                ls[0] = ls[1];
                ls[1] = -lit;
            }
            if (lit_value(ls[0]) > 0) {
                i++;
                continue;
            }
            for (j = 2; j < len; j++) {
                if (lit_value(ls[j]) >= 0) {
                    ls[1] = ls[j];
                    ls[j] = -lit;
                    vec_push(&watchlists[lit_index(ls[1])], cid);
                    ws->data[i] = ws->data[--ws->n];
                    moved = 1;
                    break;
                }
            }
            if (moved)
                continue;
            if (lit_value(ls[0]) < 0)
                return 1;
            enqueue(ls[0]);
            i++;
        }
    }
    return 0;
}

static int pick_branch(void)
{
    /* lowest unassigned index, positive polarity first */
    int v;
    for (v = 1; v <= nvars; v++)
        if (!assign[v])
            return v;
    return 0;
}

static void emit_cost(void)
{
    printf("c cost %ld\n", decisions);
}

static void emit_sat(void)
{
    int v, col = 0;
    if (proof)
        fclose(proof);
    emit_cost();
    puts("s SATISFIABLE");
    printf("v");
    for (v = 1; v <= nvars; v++) {
        int lit = assign[v] > 0 ? v : -v;
        printf(" %d", lit);
        if (++col == 20 && v < nvars) {
            printf("\nv");
            col = 0;
        }
    }
    printf(" 0\n");
    exit(10);
}

static void emit_unsat(void)
{
    if (proof) {
        fputs("0\n", proof);
        fclose(proof);
    }
    emit_cost();
    puts("s UNSATISFIABLE");
    exit(20);
}

static void emit_budget_exceeded(void)
{
    if (proof)
        fclose(proof);
    printf("c decision budget exceeded\n");
    emit_cost();
    exit(0);
}

static void log_conflict_lemma(void)
{
    int i;
    if (!proof)
        return;
    for (i = 0; i < ndec; i++)
        fprintf(proof, "%d ", -declit[i]);
    fputs("0\n", proof);
}

static void parse_dimacs(const char *path)
{
    FILE *fh = fopen(path, "r");
    char tok[256];
    int *buf = NULL;
    int buf_n = 0, buf_cap = 0;
    int header_seen = 0;

    if (!fh) {
        fprintf(stderr, "c cannot open %s\n", path);
        exit(1);
    }
    while (fscanf(fh, "%255s", tok) == 1) {
        if (tok[0] == 'c') {
            int ch;
            while ((ch = fgetc(fh)) != '\n' && ch != EOF)
                ;
            continue;
        }
        if (tok[0] == 'p') {
            int nc;
            if (fscanf(fh, "%255s", tok) != 1 || strcmp(tok, "cnf") != 0 ||
                fscanf(fh, "%d %d", &nvars, &nc) != 2) {
                fprintf(stderr, "c malformed header\n");
                exit(1);
            }
            header_seen = 1;
            assign = xmalloc((size_t)(nvars + 1) * sizeof(signed char));
            memset(assign, 0, (size_t)(nvars + 1));
            trail = xmalloc((size_t)(nvars + 1) * sizeof(int));
            declit = xmalloc((size_t)(nvars + 1) * sizeof(int));
            dectrail = xmalloc((size_t)(nvars + 1) * sizeof(int));
            watchlists = xmalloc((size_t)(2 * nvars + 2) * sizeof(IntVec));
            memset(watchlists, 0, (size_t)(2 * nvars + 2) * sizeof(IntVec));
            continue;
        }
        if (tok[0] == '%')
            break;
        if (!header_seen) {
            fprintf(stderr, "c clause data before header\n");
            exit(1);
        }
        {
            int lit = (int)strtol(tok, NULL, 10);
            if (lit == 0) {
                int *copy = xmalloc((size_t)(buf_n ? buf_n : 1) * sizeof(int));
                memcpy(copy, buf, (size_t)buf_n * sizeof(int));
                add_clause(copy, buf_n);
                buf_n = 0;
            } else {
                if (abs(lit) > nvars) {
                    fprintf(stderr, "c literal out of range\n");
                    exit(1);
                }
                if (buf_n == buf_cap) {
                    buf_cap = buf_cap ? buf_cap * 2 : 16;
                    buf = realloc(buf, (size_t)buf_cap * sizeof(int));
                    if (!buf) {
                        fprintf(stderr, "c out of memory\n");
                        exit(1);
                    }
                }
                buf[buf_n++] = lit;
            }
        }
    }
    free(buf);
    fclose(fh);
    if (!header_seen) {
        fprintf(stderr, "c no header\n");
        exit(1);
    }
}

int main(int argc, char **argv)
{
    if (argc < 2) {
        fprintf(stderr, "usage: %s <instance.cnf> [proof.drat]\n", argv[0]);
        return 1;
    }
    if (argc > 2) {
        proof = fopen(argv[2], "w");
        if (!proof)
            fprintf(stderr, "c cannot open proof file %s\n", argv[2]);
    }
    parse_dimacs(argv[1]);
    if (root_conflict)
        emit_unsat();

    for (;;) {
        if (propagate()) {
            int len = ndec;
            int *lem;
            int i;
            if (ndec == 0)
                emit_unsat(); /* writes the final empty clause */
            log_conflict_lemma();
            lem = xmalloc((size_t)len * sizeof(int));
            for (i = 0; i < len; i++)
                lem[i] = -declit[i];
            /* asserting literal (negated last decision) into watch slot 0 */
            if (len > 1) {
                int tmp = lem[0];
                lem[0] = lem[len - 1];
                lem[len - 1] = tmp;
            }
            pop_to(dectrail[ndec - 1]);
            ndec--;
            {
                int asserting = lem[0];
                add_clause(lem, len); /* len==1 path enqueues it already */
                if (lit_value(asserting) == 0)
                    enqueue(asserting);
            }
            continue;
        }
        {
            int v = pick_branch();
            if (v == 0)
                emit_sat();
            if (decisions >= decision_budget)
                emit_budget_exceeded();
            decisions++;
            declit[ndec] = v;
            dectrail[ndec] = ntrail;
            ndec++;
            enqueue(v);
        }
    }
}
