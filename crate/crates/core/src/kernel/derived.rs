//! Operations defined generically from the base structure: iterated
//! projections and base change, section pull-back, the eight operations on
//! `(Ob, Õb)`, and the canonical filler of a canonical square.

use super::{CSystem, KernelError, MorHandle, ObHandle, Result, Section};

/// `ft^i(X)`, saturating at `pt`.
pub fn ft_iter(cs: &dyn CSystem, mut x: ObHandle, i: usize) -> ObHandle {
    for _ in 0..i {
        if x.is_pt() {
            break;
        }
        x = cs.ft(x);
    }
    x
}

/// `ft(f) = f ; p_X` for `f : Y -> X`. Undefined when `l(X) = 0`.
pub fn ft_mor(cs: &dyn CSystem, f: &MorHandle) -> Result<MorHandle> {
    let x = f.target();
    if x.is_pt() {
        return Err(KernelError::domain("ft_mor", "target has length 0"));
    }
    cs.comp(f, &cs.proj(x))
}

/// `p_{X,i} : X -> ft^i(X)`, with `p_{X,0} = Id_X`.
pub fn proj_iter(cs: &dyn CSystem, x: ObHandle, i: usize) -> Result<MorHandle> {
    if x.len() < i {
        return Err(KernelError::domain("proj_iter", format!("l(X) = {} < i = {}", x.len(), i)));
    }
    let mut acc = cs.ident(x);
    let mut cur = x;
    for _ in 0..i {
        acc = cs.comp(&acc, &cs.proj(cur))?;
        cur = cs.ft(cur);
    }
    Ok(acc)
}

fn check_iter_domain(cs: &dyn CSystem, op: &'static str, f: &MorHandle, x: ObHandle, i: usize) -> Result<()> {
    if x.len() < i {
        return Err(KernelError::domain(op, format!("l(X) = {} < i = {}", x.len(), i)));
    }
    if f.target() != ft_iter(cs, x, i) {
        return Err(KernelError::domain(op, "target(f) is not ft^i(X)"));
    }
    Ok(())
}

/// `(f*(X, i), q(f, X, i))` by the inductive rule
/// `f*(X,0) = Y, q(f,X,0) = f` and
/// `f*(X,i+1) = q(f,ft X,i)* X, q(f,X,i+1) = q(q(f,ft X,i), X)`.
pub fn star_iter(cs: &dyn CSystem, f: &MorHandle, x: ObHandle, i: usize) -> Result<(ObHandle, MorHandle)> {
    check_iter_domain(cs, "star_iter", f, x, i)?;
    star_iter_unchecked(cs, f, x, i)
}

fn star_iter_unchecked(
    cs: &dyn CSystem,
    f: &MorHandle,
    x: ObHandle,
    i: usize,
) -> Result<(ObHandle, MorHandle)> {
    if i == 0 {
        return Ok((f.source(), f.clone()));
    }
    let (_, below) = star_iter_unchecked(cs, f, cs.ft(x), i - 1)?;
    Ok((cs.star(&below, x)?, cs.q(&below, x)?))
}

/// `q(f, X, i)` alone.
pub fn q_iter(cs: &dyn CSystem, f: &MorHandle, x: ObHandle, i: usize) -> Result<MorHandle> {
    star_iter(cs, f, x, i).map(|(_, q)| q)
}

/// `f*(s, i)`: the pull-back of the section `s : ft(X) -> X` along
/// `q(f, ft X, i-1)`, for `f : Y -> ft^i(X)` and `i >= 1`.
///
/// Computed as `s_g` with `g = q(f, ft X, i-1) ; s`; the characterising
/// equations hold because `ft(g) = q(f, ft X, i-1)`.
pub fn sect_pull(cs: &dyn CSystem, f: &MorHandle, s: &Section, i: usize) -> Result<Section> {
    if i == 0 {
        return Err(KernelError::domain("sect_pull", "i must be at least 1"));
    }
    let x = s.boundary();
    check_iter_domain(cs, "sect_pull", f, x, i)?;
    let (_, below) = star_iter_unchecked(cs, f, cs.ft(x), i - 1)?;
    let g = cs.comp(&below, s.mor())?;
    Ok(Section::new_unchecked(cs.sf(&g)?))
}

/// The unique `i` with `1 <= i <= l(X)` and `ft^i(X) = ft(Y)`, if any.
/// Requires `l(Y) > 0`; length forces `i = l(X) - l(ft Y)`.
pub fn level_offset(cs: &dyn CSystem, y: ObHandle, x: ObHandle) -> Option<usize> {
    if y.is_pt() || y.len() > x.len() {
        return None;
    }
    let i = x.len() + 1 - y.len();
    (ft_iter(cs, x, i) == cs.ft(y)).then_some(i)
}

/// The unique `i >= 1` with `ft^i(X) = Y`, if any.
pub fn ft_offset(cs: &dyn CSystem, y: ObHandle, x: ObHandle) -> Option<usize> {
    if y.len() >= x.len() {
        return None;
    }
    let i = x.len() - y.len();
    (ft_iter(cs, x, i) == y).then_some(i)
}

pub fn op_pt(cs: &dyn CSystem) -> ObHandle {
    cs.pt()
}

pub fn op_ft(cs: &dyn CSystem, x: ObHandle) -> ObHandle {
    cs.ft(x)
}

/// `∂(s : ft X -> X) = X`.
pub fn op_partial(s: &Section) -> ObHandle {
    s.boundary()
}

/// Weakening of an object: `T(Y, X) = p_Y*(X, i)`.
pub fn op_t(cs: &dyn CSystem, y: ObHandle, x: ObHandle) -> Result<ObHandle> {
    let i = level_offset(cs, y, x).ok_or_else(|| KernelError::domain("T", "no i with ft(Y) = ft^i(X)"))?;
    Ok(star_iter_unchecked(cs, &cs.proj(y), x, i)?.0)
}

/// Weakening of a section: `T̃(Y, r) = p_Y*(r, i)`.
pub fn op_tt(cs: &dyn CSystem, y: ObHandle, r: &Section) -> Result<Section> {
    let i = level_offset(cs, y, r.boundary())
        .ok_or_else(|| KernelError::domain("T~", "no i with ft(Y) = ft^i(∂r)"))?;
    sect_pull(cs, &cs.proj(y), r, i)
}

/// Substitution into an object: `S(s, X) = s*(X, i)` where `∂s = ft^i(X)`.
pub fn op_s(cs: &dyn CSystem, s: &Section, x: ObHandle) -> Result<ObHandle> {
    let i = ft_offset(cs, s.boundary(), x)
        .ok_or_else(|| KernelError::domain("S", "∂s is not ft^i(X) for any i >= 1"))?;
    Ok(star_iter_unchecked(cs, s.mor(), x, i)?.0)
}

/// Substitution into a section: `S̃(s, r) = s*(r, i)` where `∂s = ft^i(∂r)`.
pub fn op_st(cs: &dyn CSystem, s: &Section, r: &Section) -> Result<Section> {
    let i = ft_offset(cs, s.boundary(), r.boundary())
        .ok_or_else(|| KernelError::domain("S~", "∂s is not ft^i(∂r) for any i >= 1"))?;
    sect_pull(cs, s.mor(), r, i)
}

/// The diagonal `δ(X) = s_{Id_X} : X -> p_X* X`.
pub fn op_delta(cs: &dyn CSystem, x: ObHandle) -> Result<Section> {
    if x.is_pt() {
        return Err(KernelError::domain("δ", "l(X) = 0"));
    }
    Ok(Section::new_unchecked(cs.sf(&cs.ident(x))?))
}

/// The canonical filler `g = s_{g2} ; q(g1, f* X) : Z -> f* X` of a cone
/// `(g1 : Z -> Y, g2 : Z -> X)` over the canonical square of `(f, X)`.
///
/// The filler lands in `f* X`; it is the unique `g` with `ft(g) = g1` and
/// `g ; q(f, X) = g2`.
pub fn solve_pullback(cs: &dyn CSystem, g1: &MorHandle, g2: &MorHandle, f: &MorHandle) -> Result<MorHandle> {
    let x = g2.target();
    if x.is_pt() {
        return Err(KernelError::domain("solve_pullback", "l(X) = 0"));
    }
    if f.target() != cs.ft(x) {
        return Err(KernelError::domain("solve_pullback", "target(f) is not ft(X)"));
    }
    if g1.target() != f.source() || g1.source() != g2.source() {
        return Err(KernelError::domain("solve_pullback", "cone legs are mistyped"));
    }
    if cs.comp(g1, f)? != ft_mor(cs, g2)? {
        return Err(KernelError::domain("solve_pullback", "g1 ; f differs from ft(g2)"));
    }
    let fx = cs.star(f, x)?;
    cs.comp(&cs.sf(g2)?, &cs.q(g1, fx)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::FamilyCS;

    /// The function a morphism of a context instance induces on point
    /// coordinates, as (source point, target point) pairs.
    fn graph(cs: &FamilyCS, f: &MorHandle) -> Vec<(Vec<u32>, Vec<u32>)> {
        let src = cs.points(f.source()).unwrap();
        let tgt = cs.points(f.target()).unwrap();
        src.into_iter().zip(f.data().iter()).map(|(p, &k)| (p, tgt[k as usize].clone())).collect()
    }

    fn cs() -> FamilyCS {
        FamilyCS::context(&[2, 3]).unwrap()
    }

    #[test]
    fn projections_truncate_coordinates() {
        let cs = cs();
        let x = cs.context_object(&[0, 1, 0]).unwrap();
        for i in 0..=3 {
            let p = proj_iter(&cs, x, i).unwrap();
            assert_eq!(p.target(), ft_iter(&cs, x, i));
            for (a, b) in graph(&cs, &p) {
                assert_eq!(b, a[..3 - i].to_vec());
            }
        }
        assert!(proj_iter(&cs, x, 4).is_err());
        assert_eq!(ft_iter(&cs, x, 9), cs.pt());
    }

    #[test]
    fn base_change_along_identity_is_trivial() {
        let cs = cs();
        let x = cs.context_object(&[1, 0, 1]).unwrap();
        for i in 0..=3 {
            let id = cs.ident(ft_iter(&cs, x, i));
            let (y, q) = star_iter(&cs, &id, x, i).unwrap();
            assert_eq!(y, x);
            assert_eq!(q, cs.ident(x));
        }
        let wrong = cs.ident(x);
        assert!(star_iter(&cs, &wrong, x, 1).is_err());
    }

    #[test]
    fn level_offsets() {
        let cs = cs();
        let ob = |t: &[u32]| cs.context_object(t).unwrap();
        assert_eq!(level_offset(&cs, ob(&[1]), ob(&[0, 1])), Some(2));
        assert_eq!(level_offset(&cs, ob(&[0, 1]), ob(&[0, 1])), Some(1));
        assert_eq!(level_offset(&cs, ob(&[0, 0]), ob(&[0, 1, 1])), Some(2));
        assert_eq!(level_offset(&cs, ob(&[1, 1]), ob(&[0, 1])), None);
        assert_eq!(level_offset(&cs, cs.pt(), ob(&[0])), None);
        assert_eq!(ft_offset(&cs, ob(&[0]), ob(&[0, 1, 1])), Some(2));
        assert_eq!(ft_offset(&cs, ob(&[1]), ob(&[0, 1])), None);
    }

    #[test]
    fn weakening_inserts_types() {
        // In contexts, T(Y, X) replaces the prefix ft(Y) of X by Y.
        let cs = cs();
        let ob = |t: &[u32]| cs.context_object(t).unwrap();
        assert_eq!(op_t(&cs, ob(&[1]), ob(&[0])).unwrap(), ob(&[1, 0]));
        assert_eq!(op_t(&cs, ob(&[0, 1]), ob(&[0, 0, 1])).unwrap(), ob(&[0, 1, 0, 1]));
        assert!(op_t(&cs, ob(&[1, 1]), ob(&[0, 1])).is_err());
    }

    #[test]
    fn diagonal_duplicates_the_last_coordinate() {
        let cs = cs();
        let x = cs.context_object(&[0, 1]).unwrap();
        let d = op_delta(&cs, x).unwrap();
        assert_eq!(d.boundary(), cs.context_object(&[0, 1, 1]).unwrap());
        for (a, b) in graph(&cs, d.mor()) {
            let mut want = a.clone();
            want.push(a[1]);
            assert_eq!(b, want);
        }
        assert!(op_delta(&cs, cs.pt()).is_err());
    }

    #[test]
    fn filler_pairs_the_legs() {
        // f : Y -> ft X, with f* X = Y.(last type of X); the filler of
        // (g1, g2) sends z to (g1(z), last coordinate of g2(z)).
        let cs = cs();
        let ob = |t: &[u32]| cs.context_object(t).unwrap();
        let (y, x, z) = (ob(&[1]), ob(&[0, 1]), ob(&[0]));
        let f = cs.mor_from_table(y, ob(&[0]), &[1, 0, 1]).unwrap();
        let g1 = cs.mor_from_table(z, y, &[2, 0]).unwrap();
        let xs = cs.points(x).unwrap();
        // g2 must lie over g1 ; f, so its first coordinate is f(g1(z)).
        let over = |z: usize, e: u32| {
            let fy = [1u32, 0, 1][[2usize, 0][z]];
            xs.iter().position(|p| p == &vec![fy, e]).unwrap() as u32
        };
        let g2 = cs.mor_from_table(z, x, &[over(0, 2), over(1, 1)]).unwrap();
        let g = solve_pullback(&cs, &g1, &g2, &f).unwrap();
        assert_eq!(g.target(), cs.star(&f, x).unwrap());
        let g1_graph = graph(&cs, &g1);
        let g2_graph = graph(&cs, &g2);
        for (k, (a, b)) in graph(&cs, &g).into_iter().enumerate() {
            assert_eq!(a, g1_graph[k].0);
            assert_eq!(b, vec![g1_graph[k].1[0], g2_graph[k].1[1]]);
        }
        assert_eq!(ft_mor(&cs, &g).unwrap(), g1);
        assert_eq!(cs.comp(&g, &cs.q(&f, x).unwrap()).unwrap(), g2);
        let bad = cs.mor_from_table(z, x, &[0, 0]).unwrap();
        assert!(solve_pullback(&cs, &g1, &bad, &f).is_err());
    }
}
