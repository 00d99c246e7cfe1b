//! Default schedule: the 2023 regional minimum wage revisions, all taking
//! effect in October 2023, with posting volumes proportional to population.

/// `(id, name, old_mw, new_mw, population in millions)`.
pub const JAPAN_2023: [(u32, &str, u32, u32, f64); 47] = [
    (1, "Hokkaido", 920, 960, 5.1),
    (2, "Aomori", 853, 898, 1.2),
    (3, "Iwate", 854, 893, 1.2),
    (4, "Miyagi", 883, 923, 2.3),
    (5, "Akita", 853, 897, 0.93),
    (6, "Yamagata", 854, 900, 1.04),
    (7, "Fukushima", 858, 900, 1.8),
    (8, "Ibaraki", 911, 953, 2.8),
    (9, "Tochigi", 913, 954, 1.9),
    (10, "Gunma", 895, 935, 1.9),
    (11, "Saitama", 987, 1028, 7.3),
    (12, "Chiba", 984, 1026, 6.3),
    (13, "Tokyo", 1072, 1113, 14.0),
    (14, "Kanagawa", 1071, 1112, 9.2),
    (15, "Niigata", 890, 931, 2.2),
    (16, "Toyama", 908, 948, 1.0),
    (17, "Ishikawa", 891, 933, 1.1),
    (18, "Fukui", 888, 931, 0.75),
    (19, "Yamanashi", 898, 938, 0.8),
    (20, "Nagano", 908, 948, 2.0),
    (21, "Gifu", 910, 950, 1.9),
    (22, "Shizuoka", 944, 984, 3.6),
    (23, "Aichi", 986, 1027, 7.5),
    (24, "Mie", 933, 973, 1.7),
    (25, "Shiga", 927, 967, 1.4),
    (26, "Kyoto", 968, 1008, 2.5),
    (27, "Osaka", 1023, 1064, 8.8),
    (28, "Hyogo", 960, 1001, 5.4),
    (29, "Nara", 896, 936, 1.3),
    (30, "Wakayama", 889, 929, 0.9),
    (31, "Tottori", 854, 900, 0.54),
    (32, "Shimane", 857, 904, 0.65),
    (33, "Okayama", 892, 932, 1.9),
    (34, "Hiroshima", 930, 970, 2.7),
    (35, "Yamaguchi", 888, 928, 1.3),
    (36, "Tokushima", 855, 896, 0.7),
    (37, "Kagawa", 878, 918, 0.93),
    (38, "Ehime", 853, 897, 1.3),
    (39, "Kochi", 853, 897, 0.68),
    (40, "Fukuoka", 900, 941, 5.1),
    (41, "Saga", 853, 900, 0.8),
    (42, "Nagasaki", 853, 898, 1.3),
    (43, "Kumamoto", 853, 898, 1.7),
    (44, "Oita", 854, 899, 1.1),
    (45, "Miyazaki", 853, 897, 1.05),
    (46, "Kagoshima", 853, 897, 1.55),
    (47, "Okinawa", 853, 896, 1.47),
];

pub fn name_of(id: u32) -> Option<&'static str> {
    JAPAN_2023.iter().find(|p| p.0 == id).map(|p| p.1)
}
