#include "olab/checks.hpp"

namespace olab {

const std::vector<CheckInfo>& check_catalog() {
  static const std::vector<CheckInfo> catalog = {
      {"nishimori", "Lemma NishId", "identities"},
      {"nishimori-exact", "Lemma NishId", "identities"},
      {"l_q", "Eqs. 80/80_ll", "identities"},
      {"sampler", "Eq. post_pert", "identities"},
      {"mmse", "Eq. scalMMSE", "mmse"},
      {"matrix_mmse", "Eq. m-MMSE", "mmse"},
      {"gg", "Eq. GG_inf", "gg-scan"},
      {"gg-overlap", "Eq. 12", "gg-scan"},
      {"fluct-cross", "Eq. 14", "gg-scan"},
      {"fluct-braces", "Eq. 14", "gg-scan"},
      {"thermal_q", "Eq. 36", "thermal-scan"},
      {"gap_q12", "Eq. 2terms_controlled", "thermal-scan"},
      {"total_q", "Thm. Q_con", "total-scan"},
      {"fe-concentration", "Eq. hyp:f_conc", "total-scan"},
      {"same-f", "Lemma lemma:same_f", "total-scan"},
      {"thermal_l", "Prop. Lconc", "l-scan"},
      {"quenched_l", "Prop. Lconc", "l-scan"},
      {"decomposition", "Eq. L_decomp", "l-scan"},
      {"symmetry-constants", "Eq. f1f2", "symmetry"},
      {"b-equals-c", "Eqs. Step5eq1/Step5eq2", "symmetry"},
  };
  return catalog;
}

}  // namespace olab
