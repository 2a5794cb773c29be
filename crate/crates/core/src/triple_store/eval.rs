//! Basic graph pattern evaluation and solution modifiers.

use std::cmp::Ordering;
use std::collections::HashMap;

use super::query::{Expr, PatternTerm, Query};
use super::results::ResultTable;
use super::store::{TermId, TripleSet};
use super::term::Term;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("variable ?{0} is not bound by the graph pattern")]
    UnboundVariable(String),
}

type Row = Vec<Option<Term>>;
type Solution = Vec<Option<TermId>>;

#[derive(Clone, Copy)]
enum Slot {
    Const(TermId),
    Var(usize),
}

/// Evaluates a parsed query against the store.
///
/// Patterns are joined one at a time, always picking the remaining pattern
/// with the most positions already bound. When `count` is projected the
/// solutions are grouped by the remaining projected expressions.
pub fn evaluate(store: &TripleSet, query: &Query) -> Result<ResultTable, EvalError> {
    let pattern_vars = query.pattern_vars();
    let aggregate = query.is_aggregate();
    for proj in &query.projection {
        if !pattern_vars.contains(&proj.expr.var()) {
            return Err(EvalError::UnboundVariable(proj.expr.var().to_owned()));
        }
    }
    let outputs = query.output_vars();
    let mut order_refs = Vec::with_capacity(query.order_by.len());
    for key in &query.order_by {
        let name = key.expr.var();
        let column = outputs.iter().position(|o| o == name);
        let reference = match (&key.expr, column) {
            (Expr::Var(_), Some(c)) => SortRef::Column(c, false),
            (Expr::Str(_), Some(c)) => SortRef::Column(c, true),
            (_, None) if !aggregate && pattern_vars.contains(&name) => {
                let idx = pattern_vars.iter().position(|v| *v == name).unwrap();
                SortRef::Solution(idx, matches!(key.expr, Expr::Str(_)))
            }
            _ => return Err(EvalError::UnboundVariable(name.to_owned())),
        };
        order_refs.push((reference, key.descending));
    }

    let solutions = solve_bgp(store, query, &pattern_vars);
    let var_index = |v: &str| pattern_vars.iter().position(|p| *p == v).unwrap();

    let mut rows: Vec<(Row, Option<Solution>)> = if aggregate {
        group_rows(store, query, &solutions, &var_index)
            .into_iter()
            .map(|r| (r, None))
            .collect()
    } else {
        solutions
            .into_iter()
            .map(|sol| {
                let row = query
                    .projection
                    .iter()
                    .map(|p| project(store, &p.expr, sol[var_index(p.expr.var())]))
                    .collect();
                (row, Some(sol))
            })
            .collect()
    };

    if !query.order_by.is_empty() {
        let key_value = |row: &(Row, Option<Solution>), r: &SortRef| -> Option<Term> {
            match *r {
                SortRef::Column(c, as_str) => row.0[c].clone().map(|t| if as_str { Term::literal(t.lexical()) } else { t }),
                SortRef::Solution(i, as_str) => row.1.as_ref().and_then(|sol| sol[i]).map(|id| {
                    let t = store.term(id);
                    if as_str {
                        Term::literal(t.lexical())
                    } else {
                        t.clone()
                    }
                }),
            }
        };
        rows.sort_by(|a, b| {
            for (r, desc) in &order_refs {
                let ord = compare_terms(key_value(a, r).as_ref(), key_value(b, r).as_ref());
                let ord = if *desc { ord.reverse() } else { ord };
                if ord != Ordering::Equal {
                    return ord;
                }
            }
            tie_break(&a.0, &b.0)
        });
    }

    let mut out: Vec<Vec<Option<Term>>> = rows.into_iter().map(|(r, _)| r).collect();
    if query.distinct {
        let mut seen = std::collections::HashSet::new();
        out.retain(|row| seen.insert(row.clone()));
    }
    if let Some(limit) = query.limit {
        out.truncate(limit);
    }
    Ok(ResultTable { vars: outputs, rows: out })
}

#[derive(Clone, Copy)]
enum SortRef {
    Column(usize, bool),
    Solution(usize, bool),
}

fn project(store: &TripleSet, expr: &Expr, value: Option<TermId>) -> Option<Term> {
    let term = store.term(value?);
    Some(match expr {
        Expr::Str(_) => Term::literal(term.lexical()),
        _ => term.clone(),
    })
}

fn group_rows(
    store: &TripleSet,
    query: &Query,
    solutions: &[Vec<Option<TermId>>],
    var_index: &dyn Fn(&str) -> usize,
) -> Vec<Vec<Option<Term>>> {
    let keyed: Vec<usize> = (0..query.projection.len())
        .filter(|&i| !query.projection[i].expr.is_aggregate())
        .collect();
    let mut order: Vec<Vec<Option<Term>>> = Vec::new();
    let mut groups: HashMap<Vec<Option<Term>>, Vec<u64>> = HashMap::new();
    for sol in solutions {
        let key: Vec<Option<Term>> = keyed
            .iter()
            .map(|&i| {
                let expr = &query.projection[i].expr;
                project(store, expr, sol[var_index(expr.var())])
            })
            .collect();
        let counts = groups.entry(key.clone()).or_insert_with(|| {
            order.push(key);
            vec![0; query.projection.len()]
        });
        for (i, proj) in query.projection.iter().enumerate() {
            if let Expr::Count(v) = &proj.expr {
                if sol[var_index(v)].is_some() {
                    counts[i] += 1;
                }
            }
        }
    }
    if solutions.is_empty() && keyed.is_empty() {
        return vec![query.projection.iter().map(|_| Some(Term::integer(0))).collect()];
    }
    order
        .into_iter()
        .map(|key| {
            let counts = &groups[&key];
            let mut keys = key.into_iter();
            query
                .projection
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    if p.expr.is_aggregate() {
                        Some(Term::integer(counts[i]))
                    } else {
                        keys.next().unwrap()
                    }
                })
                .collect()
        })
        .collect()
}

fn solve_bgp(store: &TripleSet, query: &Query, vars: &[&str]) -> Vec<Vec<Option<TermId>>> {
    let mut compiled = Vec::with_capacity(query.patterns.len());
    for pattern in &query.patterns {
        let mut slots = [Slot::Const(0); 3];
        for (slot, pos) in slots.iter_mut().zip(pattern.positions()) {
            *slot = match pos {
                PatternTerm::Var(v) => Slot::Var(vars.iter().position(|x| x == v).unwrap()),
                PatternTerm::Term(t) => match store.id_of(t) {
                    Some(id) => Slot::Const(id),
                    None => return Vec::new(),
                },
            };
        }
        compiled.push(slots);
    }

    let mut bound = vec![false; vars.len()];
    let mut solutions = vec![vec![None; vars.len()]];
    let mut remaining: Vec<[Slot; 3]> = compiled;
    while !remaining.is_empty() && !solutions.is_empty() {
        let next = (0..remaining.len())
            .max_by_key(|&i| {
                let bound_positions = remaining[i]
                    .iter()
                    .filter(|s| match s {
                        Slot::Const(_) => true,
                        Slot::Var(v) => bound[*v],
                    })
                    .count();
                (bound_positions, std::cmp::Reverse(i))
            })
            .unwrap();
        let pattern = remaining.remove(next);
        let mut extended = Vec::new();
        for sol in &solutions {
            let fixed = pattern.map(|s| match s {
                Slot::Const(id) => Some(id),
                Slot::Var(v) => sol[v],
            });
            'triples: for (s, p, o) in store.matching(fixed[0], fixed[1], fixed[2]) {
                let mut candidate = sol.clone();
                for (slot, value) in pattern.iter().zip([s, p, o]) {
                    if let Slot::Var(v) = *slot {
                        match candidate[v] {
                            Some(existing) if existing != value => continue 'triples,
                            _ => candidate[v] = Some(value),
                        }
                    }
                }
                extended.push(candidate);
            }
        }
        for slot in pattern {
            if let Slot::Var(v) = slot {
                bound[v] = true;
            }
        }
        solutions = extended;
    }
    if !remaining.is_empty() {
        return Vec::new();
    }
    solutions
}

/// Total order used by ORDER BY: unbound first, then numeric literals by
/// value, then everything else by lexical form.
pub fn compare_terms(a: Option<&Term>, b: Option<&Term>) -> Ordering {
    fn rank(t: Option<&Term>) -> u8 {
        match t {
            None => 0,
            Some(t) if t.numeric_value().is_some() => 1,
            Some(_) => 2,
        }
    }
    rank(a).cmp(&rank(b)).then_with(|| match (a, b) {
        (Some(x), Some(y)) => {
            let numeric = match (x.numeric_value(), y.numeric_value()) {
                (Some(nx), Some(ny)) => nx.total_cmp(&ny),
                _ => Ordering::Equal,
            };
            numeric
                .then_with(|| x.lexical().cmp(y.lexical()))
                .then_with(|| x.cmp(y))
        }
        _ => Ordering::Equal,
    })
}

/// Deterministic tie-break after the declared keys: lexical form of each
/// projected column, left to right.
fn tie_break(a: &[Option<Term>], b: &[Option<Term>]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        let ord = match (x, y) {
            (None, None) => Ordering::Equal,
            (None, Some(_)) => Ordering::Less,
            (Some(_), None) => Ordering::Greater,
            (Some(x), Some(y)) => x.lexical().cmp(y.lexical()).then_with(|| x.cmp(y)),
        };
        if ord != Ordering::Equal {
            return ord;
        }
    }
    Ordering::Equal
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::triple_store::{parse_ntriples, parse_query};

    fn store() -> TripleSet {
        parse_ntriples(
            r#"<e:a> <p:type> <c:Gene> .
<e:b> <p:type> <c:Gene> .
<e:c> <p:type> <c:Disease> .
<e:a> <p:name> "alpha" .
<e:b> <p:name> "beta" .
<e:x> <p:link> <e:a> .
<e:x> <p:link> <e:c> .
<e:x> <p:paper> <pm:1> .
<e:x> <p:paper> <pm:2> .
<e:y> <p:link> <e:b> .
<e:y> <p:link> <e:c> .
<e:y> <p:paper> <pm:3> .
"#,
        )
        .unwrap()
    }

    fn run(text: &str) -> ResultTable {
        evaluate(&store(), &parse_query(text).unwrap()).unwrap()
    }

    #[test]
    fn empty_store_yields_no_rows() {
        let q = parse_query("SELECT ?s WHERE { ?s ?p ?o }").unwrap();
        assert!(evaluate(&TripleSet::new(), &q).unwrap().rows.is_empty());
    }

    #[test]
    fn type_scan() {
        let t = run("SELECT ?g WHERE { ?g <p:type> <c:Gene> } ORDER BY ?g");
        assert_eq!(t.rows, vec![vec![Some(Term::iri("e:a"))], vec![Some(Term::iri("e:b"))]]);
    }

    #[test]
    fn unknown_constant_yields_no_rows() {
        assert!(run("SELECT ?g WHERE { ?g <p:type> <c:Nothing> }").rows.is_empty());
    }

    #[test]
    fn implicit_grouping_counts_per_group() {
        let t = run(
            "SELECT str(?n) as ?name count(?paper) as ?papers WHERE { ?a <p:link> ?g , ?d ; <p:paper> ?paper . \
             ?g <p:type> <c:Gene> ; <p:name> ?n . ?d <p:type> <c:Disease> } ORDER BY DESC(?papers)",
        );
        assert_eq!(t.vars, ["name", "papers"]);
        assert_eq!(
            t.rows,
            vec![
                vec![Some(Term::literal("alpha")), Some(Term::integer(2))],
                vec![Some(Term::literal("beta")), Some(Term::integer(1))],
            ]
        );
    }

    #[test]
    fn count_without_keys_on_empty_input_is_zero() {
        let t = run("SELECT count(?x) as ?n WHERE { ?x <p:none> ?y }");
        assert_eq!(t.rows, vec![vec![Some(Term::integer(0))]]);
    }

    #[test]
    fn numeric_order_beats_lexical() {
        let s = parse_ntriples(
            "<e:1> <p:v> \"10\"^^<http://www.w3.org/2001/XMLSchema#integer> .\n<e:2> <p:v> \"9\"^^<http://www.w3.org/2001/XMLSchema#integer> .\n",
        )
        .unwrap();
        let q = parse_query("SELECT ?e WHERE { ?e <p:v> ?v } ORDER BY DESC(?v)").unwrap();
        let t = evaluate(&s, &q).unwrap();
        assert_eq!(t.rows[0][0], Some(Term::iri("e:1")));
    }

    #[test]
    fn distinct_then_limit() {
        let t = run("SELECT DISTINCT ?d WHERE { ?a <p:link> ?d . ?d <p:type> <c:Disease> }");
        assert_eq!(t.rows.len(), 1);
        let t = run("SELECT ?p WHERE { ?a <p:paper> ?p } ORDER BY DESC(?p) LIMIT 2");
        assert_eq!(t.rows, vec![vec![Some(Term::iri("pm:3"))], vec![Some(Term::iri("pm:2"))]]);
    }

    #[test]
    fn repeated_variable_in_pattern() {
        let s = parse_ntriples("<e:1> <p:x> <e:1> .\n<e:1> <p:x> <e:2> .\n").unwrap();
        let q = parse_query("SELECT ?a WHERE { ?a <p:x> ?a }").unwrap();
        assert_eq!(evaluate(&s, &q).unwrap().rows, vec![vec![Some(Term::iri("e:1"))]]);
    }

    #[test]
    fn projecting_unknown_variable_fails() {
        let q = parse_query("SELECT ?nope WHERE { ?s ?p ?o }").unwrap();
        assert_eq!(evaluate(&store(), &q).unwrap_err(), EvalError::UnboundVariable("nope".into()));
        let q = parse_query("SELECT ?s WHERE { ?s ?p ?o } ORDER BY ?nope").unwrap();
        assert_eq!(evaluate(&store(), &q).unwrap_err(), EvalError::UnboundVariable("nope".into()));
    }

    #[test]
    fn order_by_unprojected_variable() {
        let t = run("SELECT ?g WHERE { ?g <p:name> ?n } ORDER BY DESC(?n)");
        assert_eq!(t.rows[0][0], Some(Term::iri("e:b")));
    }
}
