void kernel_ete(double * _data_dst_edge_x, double * _data_dst_edge_y, double * _data_dst_edge_xy, double const * const _data_src_edge_x, double const * const _data_src_edge_y, double const * const _data_src_edge_xy, double const * const _data_ete)
{
const double xi_0 = _data_ete[0];
const double xi_1 = _data_ete[1];
const double xi_2 = _data_ete[2];
const double xi_3 = _data_ete[3];
const double xi_4 = _data_ete[4];
const double xi_5 = _data_ete[5];
const double xi_6 = _data_ete[6];
const double xi_7 = _data_ete[7];
const double xi_8 = _data_ete[8];
const double xi_9 = _data_ete[9];
const double xi_10 = _data_ete[10];
const double xi_11 = _data_ete[11];
const double xi_12 = _data_ete[12];
const double xi_13 = _data_ete[13];
const double xi_14 = _data_ete[14];
for (int ctr_2 = 1; ctr_2 < 7; ctr_2 += 1) {
for (int ctr_1 = 1; ctr_1 < 7 - ctr_2; ctr_1 += 1) {
 const double xi_15 = xi_0*_data_src_edge_x[ctr_1 + 9*ctr_2 - ((ctr_2*(ctr_2 + 1)) / (2))];
 const double xi_16 = xi_1*_data_src_edge_y[ctr_1 + 9*ctr_2 - ((ctr_2*(ctr_2 + 1)) / (2))];
 const double xi_17 = xi_2*_data_src_edge_y[ctr_1 + 9*ctr_2 - ((ctr_2*(ctr_2 - 1)) / (2)) - 8];
 const double xi_18 = xi_3*_data_src_edge_xy[ctr_1 + 9*ctr_2 - ((ctr_2*(ctr_2 + 1)) / (2))];
 const double xi_19 = xi_4*_data_src_edge_xy[ctr_1 + 9*ctr_2 - ((ctr_2*(ctr_2 - 1)) / (2)) - 9];
 _data_dst_edge_x[ctr_1 + 9*ctr_2 - ((ctr_2*(ctr_2 + 1)) / (2))] = xi_15 + xi_16 + xi_17 + xi_18 + xi_19;
 const double xi_20 = xi_5*_data_src_edge_y[ctr_1 + 9*ctr_2 - ((ctr_2*(ctr_2 + 1)) / (2))];
 const double xi_21 = xi_6*_data_src_edge_x[ctr_1 + 9*ctr_2 - ((ctr_2*(ctr_2 + 1)) / (2))];
 const double xi_22 = xi_7*_data_src_edge_x[ctr_1 + 9*ctr_2 - (((ctr_2 + 1)*(ctr_2 + 2)) / (2)) + 8];
 const double xi_23 = xi_8*_data_src_edge_xy[ctr_1 + 9*ctr_2 - ((ctr_2*(ctr_2 + 1)) / (2))];
 const double xi_24 = xi_9*_data_src_edge_xy[ctr_1 + 9*ctr_2 - ((ctr_2*(ctr_2 + 1)) / (2)) - 1];
 _data_dst_edge_y[ctr_1 + 9*ctr_2 - ((ctr_2*(ctr_2 + 1)) / (2))] = xi_20 + xi_21 + xi_22 + xi_23 + xi_24;
 const double xi_25 = xi_10*_data_src_edge_xy[ctr_1 + 9*ctr_2 - ((ctr_2*(ctr_2 + 1)) / (2))];
 const double xi_26 = xi_11*_data_src_edge_x[ctr_1 + 9*ctr_2 - ((ctr_2*(ctr_2 + 1)) / (2))];
 const double xi_27 = xi_12*_data_src_edge_x[ctr_1 + 9*ctr_2 - (((ctr_2 + 1)*(ctr_2 + 2)) / (2)) + 9];
 const double xi_28 = xi_13*_data_src_edge_y[ctr_1 + 9*ctr_2 - ((ctr_2*(ctr_2 + 1)) / (2))];
 const double xi_29 = xi_14*_data_src_edge_y[ctr_1 + 9*ctr_2 - ((ctr_2*(ctr_2 + 1)) / (2)) + 1];
 _data_dst_edge_xy[ctr_1 + 9*ctr_2 - ((ctr_2*(ctr_2 + 1)) / (2))] = xi_25 + xi_26 + xi_27 + xi_28 + xi_29;
}
}
}
