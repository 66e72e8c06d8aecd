// Frozen oracle values produced by tests/oracles/generate.py. Do not edit.
#pragma once
#include <complex>
namespace oracle {
struct Real2 { int k; double x; double value; };
struct Lag { int k; double alpha; double x; double value; };
struct Heat { double t; double lambda; std::complex<double> y, v, value; };
inline constexpr Real2 kHermite[] = {
    {0, 0.0, 0.75112554446494248286},
    {1, 0.7, 0.58200058556771562615},
    {2, -1.3, 0.54299477907426908762},
    {5, 2.1, 0.10310425227735398572},
    {10, 0.4, 0.096316893684391221117},
    {30, 3.5, -0.092069140554939699352},
    {64, -5.0, -0.019798259268288728443},
};
inline constexpr Lag kLaguerre[] = {
    {0, 0.0, 1.5, 1.0},
    {3, 0.0, 0.8, -0.52533333333333337419},
    {5, 1.0, 2.3, 0.44216308333333292015},
    {12, 2.0, 4.1, -0.60037301479177346561},
    {20, 0.0, 10.0, -11.961333867812118632},
};
inline constexpr Heat kHeat[] = {
    {1.0, 1.0, {0.2999999999999999889, 0.2000000000000000111}, {-0.5, 0.10000000000000000555}, {0.061563863155672310434, -0.00040418343016823534515}},
    {0.5, -2.0, {1.0, 0.0}, {0.0, 0.4000000000000000222}, {0.078019908483636516166, 0.0}},
    {2.0, 0.5, {0.10000000000000000555, -0.69999999999999995559}, {0.9000000000000000222, 0.0}, {0.032063482450043254887, 0.00073688816245520381255}},
};
inline constexpr double kPolyCoeffs[] = {0.42857142857142855, -0.4, 0.8461538461538461, 0.3333333333333333, -0.5555555555555556, 0.18181818181818182};
inline constexpr double kPolyMoment = 0.77098496261915761261;
inline constexpr double kOscillatoryMoment = 1.3803884470431429748;
inline constexpr double kHeatTrace = 0.42545906411966077257;
inline constexpr double kCocycleExample = -0.65651764274966565182;
inline constexpr double kExpInput[3][3][2] = {
    {{-0.1689512964458331, -0.12673030850172537}, {-0.4141867767876204, -0.5850278923043558}, {0.11967666956996983, 0.32775628631484105}},
    {{-1.4319174749423809, 0.3539533902130543}, {0.22756180285534736, -0.7422901526161834}, {-0.2573564851869521, -0.74653436221748}},
    {{-0.5808402595594416, -1.1760297311911694}, {0.07882982010503735, -0.6301514352694315}, {-1.5611790787251845, 0.25553151361303983}},
};
inline constexpr double kExpOutput[3][3][2] = {
    {{1.4878543806164362, 0.034181709951367434}, {-0.6151143400289645, -0.502032792097468}, {-0.032099958801834555, 0.3697238416435442}},
    {{-1.6039379143399373, 1.2587259634018082}, {1.4328782738142933, -0.5877393653595515}, {-0.4208568307920189, -0.5611551497431886}},
    {{-0.14064155410528623, -0.39069334661453153}, {-0.14541684199709176, -0.10981713882688036}, {0.2081548787102483, 0.05246866947397045}},
};
}  // namespace oracle
