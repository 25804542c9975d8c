#pragma once

// Angular-momentum coupling. All quantum numbers are passed doubled
// (two_j = 2j) so half-integers are exact.

namespace photonshape::angular {

double wigner_3j(int two_j1, int two_j2, int two_j3,
                 int two_m1, int two_m2, int two_m3);

double wigner_6j(int two_j1, int two_j2, int two_j3,
                 int two_j4, int two_j5, int two_j6);

// Dipole transition |F, mF> (lower, fine-structure J) <-> |F', mF'> (upper, J')
// for nuclear spin I. q = mF - mF' is the photon polarization index.
struct DipoleTransition {
  int two_I;
  int two_J;
  int two_Jp;
  int two_F;
  int two_mF;
  int two_Fp;
  int two_mFp;
};

// Signed dipole matrix element normalized so that, for every upper state,
// the squared coefficients over all lower states and polarizations sum to 1.
// Selection-rule violations give exactly 0.
double dipole_coupling(const DipoleTransition& t);

}  // namespace photonshape::angular
