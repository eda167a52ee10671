use hsiseg::lbae::{Conv1dSpec, Lbae, LbaeArchitecture};
use ndarray::Array2;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn latent_length_is_28_for_any_widths(c1 in 1usize..24, c2 in 1usize..24, c3 in 1usize..24, seed in any::<u64>()) {
        let arch = LbaeArchitecture::with_widths(112, c1, c2, c3);
        prop_assert_eq!(arch.latent_len().unwrap(), 28);
        let m = Lbae::<f32>::new(arch, seed).unwrap();
        let pixel: Vec<f32> = (0..112).map(|b| (b as f32 / 112.0).sin().abs()).collect();
        prop_assert_eq!(m.encode(&pixel).unwrap().len(), 28);
        prop_assert_eq!(m.reconstruct(&pixel).unwrap().len(), 112);
    }

    #[test]
    fn decoder_output_stays_inside_the_unit_interval(code in prop::collection::vec(0u8..2, 28), seed in any::<u64>()) {
        let m = Lbae::<f64>::new(LbaeArchitecture::standard(), seed).unwrap();
        prop_assert!(m.decode(&code).unwrap().iter().all(|&v| v > 0.0 && v < 1.0));
    }

    #[test]
    fn encoding_is_deterministic_and_order_free(rows in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 112), 2..6), seed in any::<u64>()) {
        let n = rows.len();
        let data = Array2::from_shape_fn((n, 112), |(i, j)| rows[i][j]);
        let reversed = Array2::from_shape_fn((n, 112), |(i, j)| rows[n - 1 - i][j]);
        let m = Lbae::<f64>::new(LbaeArchitecture::standard(), seed).unwrap();
        let a = m.latent_codes(data.view()).unwrap();
        let b = m.latent_codes(reversed.view()).unwrap();
        for i in 0..n {
            prop_assert_eq!(a.row(i), b.row(n - 1 - i));
            let single: Vec<f64> = m.encode(&rows[i]).unwrap().into_iter().map(f64::from).collect();
            prop_assert_eq!(a.row(i).to_vec(), single);
        }
    }
}

proptest! {
    #[test]
    fn conv_output_length_formula(l_in in 1usize..300, kernel in 1usize..6, stride in 1usize..4, padding in 0usize..3, dilation in 1usize..3) {
        let spec = Conv1dSpec { dilation, ..Conv1dSpec::new(1, 1, kernel, stride, padding) };
        let span = dilation * (kernel - 1) + 1;
        let expected = (l_in + 2 * padding >= span).then(|| (l_in + 2 * padding - span) / stride + 1);
        prop_assert_eq!(spec.output_len(l_in), expected);
    }
}
