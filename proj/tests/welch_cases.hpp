/*
 * Copyright 2026 The crowdcl Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef CROWDCL_TESTS_WELCH_CASES_HPP
#define CROWDCL_TESTS_WELCH_CASES_HPP

#include <vector>

namespace testutil {

/// Frozen reference p-values from an independent statistics package
/// (one-tailed Welch test, upper tail).
struct WelchCase {
    std::vector<double> a, b;
    double expected_p;
};

inline const std::vector<WelchCase>& welch_reference_cases() {
    static const std::vector<WelchCase> cases = {
        {{0.688680, 0.552156, 0.685885, 0.476250, 0.632129},
         {0.661718, 0.563745, 0.618921, 0.738168, 0.509156, 0.592580, 0.484993, 0.412098},
         0.27362167975706447},
        {{0.625176, 0.683770, 0.546538, 0.737379, 0.743396, 0.626562, 0.540627, 0.725605},
         {0.803695, 0.824367, 0.733132, 0.674104, 0.648601, 0.535798, 0.658297, 0.669758, 0.521666,
          0.679315, 0.657957},
         0.68430036881086509},
        {{0.406366, 0.407847, 0.379444, 0.510090, 0.252643, 0.549584, 0.484312},
         {0.105391, 0.057430, -0.000418, 0.049514, 0.071050, 0.014493, 0.039062, -0.001769,
          0.119191, -0.125345},
         1.8422311599325951e-06},
        {{0.680737, 0.664650, 0.688012, 0.740923, 0.587729, 0.606896, 0.595153, 0.503779, 0.582754},
         {0.483334, 0.464167, 0.365403, 0.525600, 0.552399, 0.483995},
         0.00066755150859708855},
        {{0.813857, 0.756301, 0.759953, 0.702527, 0.752085, 0.738421, 0.797586, 0.837365},
         {0.279455, 0.400961, 0.208150, 0.265534, 0.278237, 0.267661, 0.306034, 0.389426, 0.302833,
          0.299719, 0.197847},
         2.0419068648032304e-13},
        {{0.623261, 0.512726, 0.471321, 0.839336},
         {0.248295, 0.202819, 0.248388, 0.249029, 0.122682, 0.181224, 0.192645},
         0.0069570532159243682},
        {{0.875423, 0.609450, 0.664848, 0.693780, 0.745501},
         {0.657481, 0.546182, 0.646660, 0.416269, 0.624971, 0.617184, 0.550690, 0.595128, 0.617561,
          0.749595, 0.623297},
         0.032868537521703191},
        {{0.416037, 0.328350, 0.514446, 0.384235, 0.477591, 0.498306, 0.472234, 0.312323},
         {0.651996, 0.453359, 0.576043, 0.503806, 0.609677, 0.579963, 0.283080},
         0.94724556585568387},
        {{0.674968, 0.691012, 0.686945, 0.579889},
         {0.766568, 0.742009, 0.690021, 0.757507, 0.571913, 0.748753, 0.707949, 0.650464, 0.662941,
          0.575429, 0.659013},
         0.7734796538714126},
        {{0.535685, 0.793721, 0.680469, 0.886097, 0.702863, 0.852585, 0.783200, 0.809539, 0.771869,
          0.807279},
         {0.344159, 0.451567, 0.463924, 0.505430, 0.459444, 0.519759, 0.529392, 0.434643, 0.664404,
          0.422061},
         1.2890674049525019e-06},
    };
    return cases;
}

} // namespace testutil

#endif
