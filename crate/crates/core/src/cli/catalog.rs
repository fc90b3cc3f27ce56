/// Deterministic listing of catalog maps, targets and exhaustions with
/// their parameters and accepted ranges.
pub fn list_catalog() -> String {
    let entries: [(&str, &[(&str, &str)]); 3] = [
        (
            "maps ([map], key `name`)",
            &[
                ("power_curve", "d: integer in 1..=64; z -> [1 : z^d] into P^1"),
                ("exp_curve", "no parameters; z -> [1 : e^z] into P^1"),
                ("product_map", "d1, d2: integers in 1..=64; into P^1 x P^1, k = 2"),
                ("linear_embedding", "k, m: integers with 1 <= k <= m; C^k -> P^m"),
                ("degenerate_map", "c_re, c_im: finite reals (default 0); constant map, negative control"),
            ],
        ),
        (
            "targets (implied by the map)",
            &[
                ("projective_space", "m >= 1; Fubini-Study form, P^1 has area pi"),
                ("projective_product", "factor dimensions >= 1; sum of Fubini-Study forms"),
                ("flat_torus", "m >= 1; flat form; no test-form dictionary"),
            ],
        ),
        (
            "exhaustions ([exhaustion], key `name`)",
            &[
                ("norm_squared", "k >= 1; r0 >= 0 (default 0); tau = |z|^2"),
                ("ellipsoidal", "k >= 1; weights: k reals > 0; r0 >= 0 (default 0)"),
                (
                    "radial_perturbation",
                    "k >= 1; amplitude >= 0 (default 4), width > 0 (default 0.5), center > 0 (default 2), r0 >= 0 (default 1e-3)",
                ),
            ],
        ),
    ];
    let mut out = String::new();
    for (heading, items) in entries {
        out.push_str(heading);
        out.push('\n');
        for (name, params) in items {
            out.push_str(&format!("  {name:<20} {params}\n"));
        }
    }
    out.push_str("filtrations ([profile] filtration): tau_sublevel, euclidean_ball (norm_squared only)\n");
    out.push_str("samplers ([profile] sampler): rejection, stratified (norm_squared only)\n");
    out.push_str("dictionary ([dictionary]): degree_cap >= 1 (default 2), size >= 1 (default 10), seed (default 0)\n");
    out.push_str("criteria ([criterion] kind): none, thm2 {k_doubling > 1, count >= 1}, thm3 {epsilon in (0,1), l > 0}\n");
    out
}
