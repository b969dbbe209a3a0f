"""Unrolled per-cell collision and moment kernels. Generated by ``cskf._codegen``; do not edit."""
import numba

CHUNK = 256


@numba.njit(cache=True, parallel=True)
def collide_kernel(f, active, factor, s_low, nu_prime, rho_out, u_out):
    n = f.shape[1]
    nchunk = (n + CHUNK - 1) // CHUNK
    for c in numba.prange(nchunk):
        for cell in range(c * CHUNK, min(n, (c + 1) * CHUNK)):
            F0 = f[26, cell]
            F1 = f[10, cell]
            F2 = f[22, cell]
            F3 = f[14, cell]
            F4 = f[2, cell]
            F5 = f[12, cell]
            F6 = f[24, cell]
            F7 = f[8, cell]
            F8 = f[20, cell]
            F9 = f[18, cell]
            F10 = f[4, cell]
            F11 = f[16, cell]
            F12 = f[6, cell]
            F13 = f[0, cell]
            F14 = f[5, cell]
            F15 = f[17, cell]
            F16 = f[3, cell]
            F17 = f[15, cell]
            F18 = f[25, cell]
            F19 = f[9, cell]
            F20 = f[21, cell]
            F21 = f[13, cell]
            F22 = f[1, cell]
            F23 = f[11, cell]
            F24 = f[23, cell]
            F25 = f[7, cell]
            F26 = f[19, cell]
            rho = F0 + F1 + F2 + F3 + F4 + F5 + F6 + F7 + F8 + F9 + F10 + F11 + F12 + F13 + F14 + F15 + F16 + F17 + F18 + F19 + F20 + F21 + F22 + F23 + F24 + F25 + F26
            inv = 1.0 / rho
            ux = (-F0 - F1 - F2 - F3 - F4 - F5 - F6 - F7 - F8 + F18 + F19 + F20 + F21 + F22 + F23 + F24 + F25 + F26) * inv
            uy = (-F0 - F1 - F2 + F6 + F7 + F8 - F9 - F10 - F11 + F15 + F16 + F17 - F18 - F19 - F20 + F24 + F25 + F26) * inv
            uz = (-F0 + F2 - F3 + F5 - F6 + F8 - F9 + F11 - F12 + F14 - F15 + F17 - F18 + F20 - F21 + F23 - F24 + F26) * inv
            if active[cell]:
                r0 = F0 + F9 + F18
                r1 = F18 - F0
                r2 = F18 + F0
                A0 = r0
                A9 = r1 - ux * r0
                A18 = r2 - 2.0 * ux * r1 + ux * ux * r0
                r0 = F1 + F10 + F19
                r1 = F19 - F1
                r2 = F19 + F1
                A1 = r0
                A10 = r1 - ux * r0
                A19 = r2 - 2.0 * ux * r1 + ux * ux * r0
                r0 = F2 + F11 + F20
                r1 = F20 - F2
                r2 = F20 + F2
                A2 = r0
                A11 = r1 - ux * r0
                A20 = r2 - 2.0 * ux * r1 + ux * ux * r0
                r0 = F3 + F12 + F21
                r1 = F21 - F3
                r2 = F21 + F3
                A3 = r0
                A12 = r1 - ux * r0
                A21 = r2 - 2.0 * ux * r1 + ux * ux * r0
                r0 = F4 + F13 + F22
                r1 = F22 - F4
                r2 = F22 + F4
                A4 = r0
                A13 = r1 - ux * r0
                A22 = r2 - 2.0 * ux * r1 + ux * ux * r0
                r0 = F5 + F14 + F23
                r1 = F23 - F5
                r2 = F23 + F5
                A5 = r0
                A14 = r1 - ux * r0
                A23 = r2 - 2.0 * ux * r1 + ux * ux * r0
                r0 = F6 + F15 + F24
                r1 = F24 - F6
                r2 = F24 + F6
                A6 = r0
                A15 = r1 - ux * r0
                A24 = r2 - 2.0 * ux * r1 + ux * ux * r0
                r0 = F7 + F16 + F25
                r1 = F25 - F7
                r2 = F25 + F7
                A7 = r0
                A16 = r1 - ux * r0
                A25 = r2 - 2.0 * ux * r1 + ux * ux * r0
                r0 = F8 + F17 + F26
                r1 = F26 - F8
                r2 = F26 + F8
                A8 = r0
                A17 = r1 - ux * r0
                A26 = r2 - 2.0 * ux * r1 + ux * ux * r0
                r0 = A0 + A3 + A6
                r1 = A6 - A0
                r2 = A6 + A0
                B0 = r0
                B3 = r1 - uy * r0
                B6 = r2 - 2.0 * uy * r1 + uy * uy * r0
                r0 = A1 + A4 + A7
                r1 = A7 - A1
                r2 = A7 + A1
                B1 = r0
                B4 = r1 - uy * r0
                B7 = r2 - 2.0 * uy * r1 + uy * uy * r0
                r0 = A2 + A5 + A8
                r1 = A8 - A2
                r2 = A8 + A2
                B2 = r0
                B5 = r1 - uy * r0
                B8 = r2 - 2.0 * uy * r1 + uy * uy * r0
                r0 = A9 + A12 + A15
                r1 = A15 - A9
                r2 = A15 + A9
                B9 = r0
                B12 = r1 - uy * r0
                B15 = r2 - 2.0 * uy * r1 + uy * uy * r0
                r0 = A10 + A13 + A16
                r1 = A16 - A10
                r2 = A16 + A10
                B10 = r0
                B13 = r1 - uy * r0
                B16 = r2 - 2.0 * uy * r1 + uy * uy * r0
                r0 = A11 + A14 + A17
                r1 = A17 - A11
                r2 = A17 + A11
                B11 = r0
                B14 = r1 - uy * r0
                B17 = r2 - 2.0 * uy * r1 + uy * uy * r0
                r0 = A18 + A21 + A24
                r1 = A24 - A18
                r2 = A24 + A18
                B18 = r0
                B21 = r1 - uy * r0
                B24 = r2 - 2.0 * uy * r1 + uy * uy * r0
                r0 = A19 + A22 + A25
                r1 = A25 - A19
                r2 = A25 + A19
                B19 = r0
                B22 = r1 - uy * r0
                B25 = r2 - 2.0 * uy * r1 + uy * uy * r0
                r0 = A20 + A23 + A26
                r1 = A26 - A20
                r2 = A26 + A20
                B20 = r0
                B23 = r1 - uy * r0
                B26 = r2 - 2.0 * uy * r1 + uy * uy * r0
                r0 = B0 + B1 + B2
                r1 = B2 - B0
                r2 = B2 + B0
                K0 = r0
                K1 = r1 - uz * r0
                K2 = r2 - 2.0 * uz * r1 + uz * uz * r0
                r0 = B3 + B4 + B5
                r1 = B5 - B3
                r2 = B5 + B3
                K3 = r0
                K4 = r1 - uz * r0
                K5 = r2 - 2.0 * uz * r1 + uz * uz * r0
                r0 = B6 + B7 + B8
                r1 = B8 - B6
                r2 = B8 + B6
                K6 = r0
                K7 = r1 - uz * r0
                K8 = r2 - 2.0 * uz * r1 + uz * uz * r0
                r0 = B9 + B10 + B11
                r1 = B11 - B9
                r2 = B11 + B9
                K9 = r0
                K10 = r1 - uz * r0
                K11 = r2 - 2.0 * uz * r1 + uz * uz * r0
                r0 = B12 + B13 + B14
                r1 = B14 - B12
                r2 = B14 + B12
                K12 = r0
                K13 = r1 - uz * r0
                K14 = r2 - 2.0 * uz * r1 + uz * uz * r0
                r0 = B15 + B16 + B17
                r1 = B17 - B15
                r2 = B17 + B15
                K15 = r0
                K16 = r1 - uz * r0
                K17 = r2 - 2.0 * uz * r1 + uz * uz * r0
                r0 = B18 + B19 + B20
                r1 = B20 - B18
                r2 = B20 + B18
                K18 = r0
                K19 = r1 - uz * r0
                K20 = r2 - 2.0 * uz * r1 + uz * uz * r0
                r0 = B21 + B22 + B23
                r1 = B23 - B21
                r2 = B23 + B21
                K21 = r0
                K22 = r1 - uz * r0
                K23 = r2 - 2.0 * uz * r1 + uz * uz * r0
                r0 = B24 + B25 + B26
                r1 = B26 - B24
                r2 = B26 + B24
                K24 = r0
                K25 = r1 - uz * r0
                K26 = r2 - 2.0 * uz * r1 + uz * uz * r0
                x2 = ux * ux
                y2 = uy * uy
                z2 = uz * uz
                fac = factor[cell]
                s9 = 1.0 / (3.0 * fac * nu_prime[9] + 0.5)
                s10 = s9 if nu_prime[10] == nu_prime[9] else 1.0 / (3.0 * fac * nu_prime[10] + 0.5)
                s11 = s10 if nu_prime[11] == nu_prime[10] else 1.0 / (3.0 * fac * nu_prime[11] + 0.5)
                s12 = s11 if nu_prime[12] == nu_prime[11] else 1.0 / (3.0 * fac * nu_prime[12] + 0.5)
                s13 = s12 if nu_prime[13] == nu_prime[12] else 1.0 / (3.0 * fac * nu_prime[13] + 0.5)
                s14 = s13 if nu_prime[14] == nu_prime[13] else 1.0 / (3.0 * fac * nu_prime[14] + 0.5)
                s15 = s14 if nu_prime[15] == nu_prime[14] else 1.0 / (3.0 * fac * nu_prime[15] + 0.5)
                s16 = s15 if nu_prime[16] == nu_prime[15] else 1.0 / (3.0 * fac * nu_prime[16] + 0.5)
                s17 = s16 if nu_prime[17] == nu_prime[16] else 1.0 / (3.0 * fac * nu_prime[17] + 0.5)
                s18 = s17 if nu_prime[18] == nu_prime[17] else 1.0 / (3.0 * fac * nu_prime[18] + 0.5)
                s19 = s18 if nu_prime[19] == nu_prime[18] else 1.0 / (3.0 * fac * nu_prime[19] + 0.5)
                s20 = s19 if nu_prime[20] == nu_prime[19] else 1.0 / (3.0 * fac * nu_prime[20] + 0.5)
                s21 = s20 if nu_prime[21] == nu_prime[20] else 1.0 / (3.0 * fac * nu_prime[21] + 0.5)
                s22 = s21 if nu_prime[22] == nu_prime[21] else 1.0 / (3.0 * fac * nu_prime[22] + 0.5)
                s23 = s22 if nu_prime[23] == nu_prime[22] else 1.0 / (3.0 * fac * nu_prime[23] + 0.5)
                s24 = s23 if nu_prime[24] == nu_prime[23] else 1.0 / (3.0 * fac * nu_prime[24] + 0.5)
                s25 = s24 if nu_prime[25] == nu_prime[24] else 1.0 / (3.0 * fac * nu_prime[25] + 0.5)
                s26 = s25 if nu_prime[26] == nu_prime[25] else 1.0 / (3.0 * fac * nu_prime[26] + 0.5)
                d4 = -s_low * (K12)
                d5 = -s_low * (K10)
                d6 = -s_low * (K4)
                d7 = -s_low * (-K6 + K18)
                d8 = -s_low * (-K2 + K18)
                d9 = -s9 * (K2 + K6 + K18 - (rho))
                d10 = -s10 * (K11 + K15 - (-rho * ux * (y2 + z2)))
                d11 = -s11 * (K5 + K21 - (-rho * uy * (x2 + z2)))
                d12 = -s12 * (K7 + K19 - (-rho * uz * (x2 + y2)))
                d13 = -s13 * (-K11 + K15 - (-rho * ux * (y2 - z2)))
                d14 = -s14 * (-K5 + K21 - (-rho * uy * (x2 - z2)))
                d15 = -s15 * (-K7 + K19 - (-rho * uz * (x2 - y2)))
                d16 = -s16 * (K13 - (-rho * ux * uy * uz))
                d17 = -s17 * (K8 + K20 + K24 - (rho / 3.0 * (9.0 * x2 * y2 + 9.0 * x2 * z2 + 9.0 * y2 * z2 + 1.0)))
                d18 = -s18 * (-K8 + K20 + K24 - (rho / 9.0 * (27.0 * x2 * y2 + 27.0 * x2 * z2 - 27.0 * y2 * z2 + 1.0)))
                d19 = -s19 * (-K20 + K24 - (3.0 * rho * x2 * (y2 - z2)))
                d20 = -s20 * (K22 - (3.0 * rho * x2 * uy * uz))
                d21 = -s21 * (K16 - (3.0 * rho * ux * y2 * uz))
                d22 = -s22 * (K14 - (3.0 * rho * ux * uy * z2))
                d23 = -s23 * (K17 - (-rho / 3.0 * ux * (18.0 * y2 * z2 + y2 + z2)))
                d24 = -s24 * (K23 - (-rho / 3.0 * uy * (18.0 * x2 * z2 + x2 + z2)))
                d25 = -s25 * (K25 - (-rho / 3.0 * uz * (18.0 * x2 * y2 + x2 + y2)))
                d26 = -s26 * (K26 - (rho * (10.0 * x2 * y2 * z2 + x2 * y2 + x2 * z2 + y2 * z2 + 1.0 / 27.0)))
                G0 = 0.0
                G1 = 0.0
                G2 = 0.3333333333333333 * d7 - 0.6666666666666666 * d8 + 0.3333333333333333 * d9
                G3 = 0.0
                G4 = d6
                G5 = 0.5 * d11 - 0.5 * d14
                G6 = -0.6666666666666666 * d7 + 0.3333333333333333 * d8 + 0.3333333333333333 * d9
                G7 = 0.5 * d12 - 0.5 * d15
                G8 = 0.5 * d17 - 0.5 * d18
                G9 = 0.0
                G10 = d5
                G11 = 0.5 * d10 - 0.5 * d13
                G12 = d4
                G13 = d16
                G14 = d22
                G15 = 0.5 * d10 + 0.5 * d13
                G16 = d21
                G17 = d23
                G18 = 0.3333333333333333 * d7 + 0.3333333333333333 * d8 + 0.3333333333333333 * d9
                G19 = 0.5 * d12 + 0.5 * d15
                G20 = 0.25 * d17 + 0.25 * d18 - 0.5 * d19
                G21 = 0.5 * d11 + 0.5 * d14
                G22 = d20
                G23 = d24
                G24 = 0.25 * d17 + 0.25 * d18 + 0.5 * d19
                G25 = d25
                G26 = d26
                r1 = G9 + ux * G0
                r2 = G18 + 2.0 * ux * G9 + ux * ux * G0
                H0 = 0.5 * (r2 - r1)
                H9 = G0 - r2
                H18 = 0.5 * (r2 + r1)
                r1 = G10 + ux * G1
                r2 = G19 + 2.0 * ux * G10 + ux * ux * G1
                H1 = 0.5 * (r2 - r1)
                H10 = G1 - r2
                H19 = 0.5 * (r2 + r1)
                r1 = G11 + ux * G2
                r2 = G20 + 2.0 * ux * G11 + ux * ux * G2
                H2 = 0.5 * (r2 - r1)
                H11 = G2 - r2
                H20 = 0.5 * (r2 + r1)
                r1 = G12 + ux * G3
                r2 = G21 + 2.0 * ux * G12 + ux * ux * G3
                H3 = 0.5 * (r2 - r1)
                H12 = G3 - r2
                H21 = 0.5 * (r2 + r1)
                r1 = G13 + ux * G4
                r2 = G22 + 2.0 * ux * G13 + ux * ux * G4
                H4 = 0.5 * (r2 - r1)
                H13 = G4 - r2
                H22 = 0.5 * (r2 + r1)
                r1 = G14 + ux * G5
                r2 = G23 + 2.0 * ux * G14 + ux * ux * G5
                H5 = 0.5 * (r2 - r1)
                H14 = G5 - r2
                H23 = 0.5 * (r2 + r1)
                r1 = G15 + ux * G6
                r2 = G24 + 2.0 * ux * G15 + ux * ux * G6
                H6 = 0.5 * (r2 - r1)
                H15 = G6 - r2
                H24 = 0.5 * (r2 + r1)
                r1 = G16 + ux * G7
                r2 = G25 + 2.0 * ux * G16 + ux * ux * G7
                H7 = 0.5 * (r2 - r1)
                H16 = G7 - r2
                H25 = 0.5 * (r2 + r1)
                r1 = G17 + ux * G8
                r2 = G26 + 2.0 * ux * G17 + ux * ux * G8
                H8 = 0.5 * (r2 - r1)
                H17 = G8 - r2
                H26 = 0.5 * (r2 + r1)
                r1 = H3 + uy * H0
                r2 = H6 + 2.0 * uy * H3 + uy * uy * H0
                P0 = 0.5 * (r2 - r1)
                P3 = H0 - r2
                P6 = 0.5 * (r2 + r1)
                r1 = H4 + uy * H1
                r2 = H7 + 2.0 * uy * H4 + uy * uy * H1
                P1 = 0.5 * (r2 - r1)
                P4 = H1 - r2
                P7 = 0.5 * (r2 + r1)
                r1 = H5 + uy * H2
                r2 = H8 + 2.0 * uy * H5 + uy * uy * H2
                P2 = 0.5 * (r2 - r1)
                P5 = H2 - r2
                P8 = 0.5 * (r2 + r1)
                r1 = H12 + uy * H9
                r2 = H15 + 2.0 * uy * H12 + uy * uy * H9
                P9 = 0.5 * (r2 - r1)
                P12 = H9 - r2
                P15 = 0.5 * (r2 + r1)
                r1 = H13 + uy * H10
                r2 = H16 + 2.0 * uy * H13 + uy * uy * H10
                P10 = 0.5 * (r2 - r1)
                P13 = H10 - r2
                P16 = 0.5 * (r2 + r1)
                r1 = H14 + uy * H11
                r2 = H17 + 2.0 * uy * H14 + uy * uy * H11
                P11 = 0.5 * (r2 - r1)
                P14 = H11 - r2
                P17 = 0.5 * (r2 + r1)
                r1 = H21 + uy * H18
                r2 = H24 + 2.0 * uy * H21 + uy * uy * H18
                P18 = 0.5 * (r2 - r1)
                P21 = H18 - r2
                P24 = 0.5 * (r2 + r1)
                r1 = H22 + uy * H19
                r2 = H25 + 2.0 * uy * H22 + uy * uy * H19
                P19 = 0.5 * (r2 - r1)
                P22 = H19 - r2
                P25 = 0.5 * (r2 + r1)
                r1 = H23 + uy * H20
                r2 = H26 + 2.0 * uy * H23 + uy * uy * H20
                P20 = 0.5 * (r2 - r1)
                P23 = H20 - r2
                P26 = 0.5 * (r2 + r1)
                r1 = P1 + uz * P0
                r2 = P2 + 2.0 * uz * P1 + uz * uz * P0
                Z0 = 0.5 * (r2 - r1)
                Z1 = P0 - r2
                Z2 = 0.5 * (r2 + r1)
                r1 = P4 + uz * P3
                r2 = P5 + 2.0 * uz * P4 + uz * uz * P3
                Z3 = 0.5 * (r2 - r1)
                Z4 = P3 - r2
                Z5 = 0.5 * (r2 + r1)
                r1 = P7 + uz * P6
                r2 = P8 + 2.0 * uz * P7 + uz * uz * P6
                Z6 = 0.5 * (r2 - r1)
                Z7 = P6 - r2
                Z8 = 0.5 * (r2 + r1)
                r1 = P10 + uz * P9
                r2 = P11 + 2.0 * uz * P10 + uz * uz * P9
                Z9 = 0.5 * (r2 - r1)
                Z10 = P9 - r2
                Z11 = 0.5 * (r2 + r1)
                r1 = P13 + uz * P12
                r2 = P14 + 2.0 * uz * P13 + uz * uz * P12
                Z12 = 0.5 * (r2 - r1)
                Z13 = P12 - r2
                Z14 = 0.5 * (r2 + r1)
                r1 = P16 + uz * P15
                r2 = P17 + 2.0 * uz * P16 + uz * uz * P15
                Z15 = 0.5 * (r2 - r1)
                Z16 = P15 - r2
                Z17 = 0.5 * (r2 + r1)
                r1 = P19 + uz * P18
                r2 = P20 + 2.0 * uz * P19 + uz * uz * P18
                Z18 = 0.5 * (r2 - r1)
                Z19 = P18 - r2
                Z20 = 0.5 * (r2 + r1)
                r1 = P22 + uz * P21
                r2 = P23 + 2.0 * uz * P22 + uz * uz * P21
                Z21 = 0.5 * (r2 - r1)
                Z22 = P21 - r2
                Z23 = 0.5 * (r2 + r1)
                r1 = P25 + uz * P24
                r2 = P26 + 2.0 * uz * P25 + uz * uz * P24
                Z24 = 0.5 * (r2 - r1)
                Z25 = P24 - r2
                Z26 = 0.5 * (r2 + r1)
                F0 = F0 + Z0
                f[26, cell] = F0
                F1 = F1 + Z1
                f[10, cell] = F1
                F2 = F2 + Z2
                f[22, cell] = F2
                F3 = F3 + Z3
                f[14, cell] = F3
                F4 = F4 + Z4
                f[2, cell] = F4
                F5 = F5 + Z5
                f[12, cell] = F5
                F6 = F6 + Z6
                f[24, cell] = F6
                F7 = F7 + Z7
                f[8, cell] = F7
                F8 = F8 + Z8
                f[20, cell] = F8
                F9 = F9 + Z9
                f[18, cell] = F9
                F10 = F10 + Z10
                f[4, cell] = F10
                F11 = F11 + Z11
                f[16, cell] = F11
                F12 = F12 + Z12
                f[6, cell] = F12
                F13 = F13 + Z13
                f[0, cell] = F13
                F14 = F14 + Z14
                f[5, cell] = F14
                F15 = F15 + Z15
                f[17, cell] = F15
                F16 = F16 + Z16
                f[3, cell] = F16
                F17 = F17 + Z17
                f[15, cell] = F17
                F18 = F18 + Z18
                f[25, cell] = F18
                F19 = F19 + Z19
                f[9, cell] = F19
                F20 = F20 + Z20
                f[21, cell] = F20
                F21 = F21 + Z21
                f[13, cell] = F21
                F22 = F22 + Z22
                f[1, cell] = F22
                F23 = F23 + Z23
                f[11, cell] = F23
                F24 = F24 + Z24
                f[23, cell] = F24
                F25 = F25 + Z25
                f[7, cell] = F25
                F26 = F26 + Z26
                f[19, cell] = F26
                rho = F0 + F1 + F2 + F3 + F4 + F5 + F6 + F7 + F8 + F9 + F10 + F11 + F12 + F13 + F14 + F15 + F16 + F17 + F18 + F19 + F20 + F21 + F22 + F23 + F24 + F25 + F26
                inv = 1.0 / rho
                ux = (-F0 - F1 - F2 - F3 - F4 - F5 - F6 - F7 - F8 + F18 + F19 + F20 + F21 + F22 + F23 + F24 + F25 + F26) * inv
                uy = (-F0 - F1 - F2 + F6 + F7 + F8 - F9 - F10 - F11 + F15 + F16 + F17 - F18 - F19 - F20 + F24 + F25 + F26) * inv
                uz = (-F0 + F2 - F3 + F5 - F6 + F8 - F9 + F11 - F12 + F14 - F15 + F17 - F18 + F20 - F21 + F23 - F24 + F26) * inv
            rho_out[cell] = rho
            u_out[0, cell] = ux
            u_out[1, cell] = uy
            u_out[2, cell] = uz


@numba.njit(cache=True, parallel=True)
def macros_kernel(f, rho_out, u_out):
    n = f.shape[1]
    nchunk = (n + CHUNK - 1) // CHUNK
    for c in numba.prange(nchunk):
        for cell in range(c * CHUNK, min(n, (c + 1) * CHUNK)):
            F0 = f[26, cell]
            F1 = f[10, cell]
            F2 = f[22, cell]
            F3 = f[14, cell]
            F4 = f[2, cell]
            F5 = f[12, cell]
            F6 = f[24, cell]
            F7 = f[8, cell]
            F8 = f[20, cell]
            F9 = f[18, cell]
            F10 = f[4, cell]
            F11 = f[16, cell]
            F12 = f[6, cell]
            F13 = f[0, cell]
            F14 = f[5, cell]
            F15 = f[17, cell]
            F16 = f[3, cell]
            F17 = f[15, cell]
            F18 = f[25, cell]
            F19 = f[9, cell]
            F20 = f[21, cell]
            F21 = f[13, cell]
            F22 = f[1, cell]
            F23 = f[11, cell]
            F24 = f[23, cell]
            F25 = f[7, cell]
            F26 = f[19, cell]
            rho = F0 + F1 + F2 + F3 + F4 + F5 + F6 + F7 + F8 + F9 + F10 + F11 + F12 + F13 + F14 + F15 + F16 + F17 + F18 + F19 + F20 + F21 + F22 + F23 + F24 + F25 + F26
            inv = 1.0 / rho
            ux = (-F0 - F1 - F2 - F3 - F4 - F5 - F6 - F7 - F8 + F18 + F19 + F20 + F21 + F22 + F23 + F24 + F25 + F26) * inv
            uy = (-F0 - F1 - F2 + F6 + F7 + F8 - F9 - F10 - F11 + F15 + F16 + F17 - F18 - F19 - F20 + F24 + F25 + F26) * inv
            uz = (-F0 + F2 - F3 + F5 - F6 + F8 - F9 + F11 - F12 + F14 - F15 + F17 - F18 + F20 - F21 + F23 - F24 + F26) * inv
            rho_out[cell] = rho
            u_out[0, cell] = ux
            u_out[1, cell] = uy
            u_out[2, cell] = uz
