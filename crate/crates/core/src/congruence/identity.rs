use crate::instances::Fragment;
use crate::kernel::{
    ft_iter, op_delta, op_tt, proj_iter, CSystem, CheckReport, MorHandle, ObHandle, Result, Tally,
};

/// Both sides of `s_{p_{X,i}} = T̃(X, T̃(ft X, ... T̃(ft^{i-1} X, δ(ft^i X))))`.
pub fn proj_section_identity(cs: &dyn CSystem, x: ObHandle, i: usize) -> Result<(MorHandle, MorHandle)> {
    let lhs = cs.sf(&proj_iter(cs, x, i)?)?;
    let mut r = op_delta(cs, ft_iter(cs, x, i))?;
    for j in (0..i).rev() {
        r = op_tt(cs, ft_iter(cs, x, j), &r)?;
    }
    Ok((lhs, r.into_mor()))
}

/// The identity for every fragment object `X` and `1 <= i < l(X)`.
pub fn proj_section_sweep(cs: &dyn CSystem, frag: &Fragment) -> CheckReport {
    let mut t = Tally::new();
    for &x in frag.objects() {
        for i in 1..x.len() {
            let inputs = || vec![cs.show_ob(x), i.to_string()];
            if let Some((lhs, rhs)) = t.absorb(proj_section_identity(cs, x, i), "proj_section", inputs) {
                t.expect(lhs == rhs, "proj_section", inputs, || cs.show_mor(&lhs), || cs.show_mor(&rhs));
            }
        }
    }
    t.finish("proj_section_identity")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{enumerate_fragment, FamilyCS, FragmentConfig, MutantCS, Mutation, UnitCS};

    #[test]
    fn holds_in_the_semantic_instances() {
        let unit = UnitCS::new();
        let ctx = FamilyCS::context(&[2]).unwrap();
        let uni = FamilyCS::universe(&[1, 2]).unwrap();
        for (cs, l) in [(&unit as &dyn CSystem, 4), (&ctx, 3), (&uni, 2)] {
            let frag = enumerate_fragment(cs, FragmentConfig::with_max_len(l));
            let r = proj_section_sweep(cs, &frag);
            assert!(r.passed(), "{}: {r:?}", cs.describe());
            assert!(r.cases > 0 || l < 2);
        }
    }

    #[test]
    fn case_count_is_sum_of_lengths() {
        let cs = UnitCS::new();
        let frag = enumerate_fragment(&cs, FragmentConfig::with_max_len(4));
        // One object per length: sum over l of (l - 1) for l = 2..4.
        assert_eq!(proj_section_sweep(&cs, &frag).cases, 1 + 2 + 3);
    }

    #[test]
    fn shifted_sf_breaks_it() {
        let cs = MutantCS::new(FamilyCS::context(&[2]).unwrap(), Mutation::ShiftSf);
        let frag = enumerate_fragment(&cs, FragmentConfig::with_max_len(3));
        assert!(proj_section_sweep(&cs, &frag).cites("proj_section"));
    }
}
