# Octahedral generator parameters for the Lebedev-Laikov quadrature rules
# (16-digit published node sets; weights normalized to unit sphere measure 1).
# Each rule is a sequence of (symmetry_code, a, b, weight) generator records.

_RULES = {
    6: (
        (0, 0, 0, 0.1666666666666667e+0),
    ),
    14: (
        (0, 0, 0, 0.6666666666666667e-1),
        (2, 0, 0, 0.7500000000000000e-1),
    ),
    26: (
        (0, 0, 0, 0.4761904761904762e-1),
        (1, 0, 0, 0.3809523809523810e-1),
        (2, 0, 0, 0.3214285714285714e-1),
    ),
    38: (
        (0, 0, 0, 0.9523809523809524e-2),
        (2, 0, 0, 0.3214285714285714e-1),
        (4, 0.4597008433809831e+0, 0, 0.2857142857142857e-1),
    ),
    50: (
        (0, 0, 0, 0.1269841269841270e-1),
        (1, 0, 0, 0.2257495590828924e-1),
        (2, 0, 0, 0.2109375000000000e-1),
        (3, 0.3015113445777636e+0, 0, 0.2017333553791887e-1),
    ),
    74: (
        (0, 0, 0, 0.5130671797338464e-3),
        (1, 0, 0, 0.1660406956574204e-1),
        (2, 0, 0, -0.2958603896103896e-1),
        (3, 0.4803844614152614e+0, 0, 0.2657620708215946e-1),
        (4, 0.3207726489807764e+0, 0, 0.1652217099371571e-1),
    ),
    86: (
        (0, 0, 0, 0.1154401154401154e-1),
        (2, 0, 0, 0.1194390908585628e-1),
        (3, 0.3696028464541502e+0, 0, 0.1111055571060340e-1),
        (3, 0.6943540066026664e+0, 0, 0.1187650129453714e-1),
        (4, 0.3742430390903412e+0, 0, 0.1181230374690448e-1),
    ),
    110: (
        (0, 0, 0, 0.3828270494937162e-2),
        (2, 0, 0, 0.9793737512487512e-2),
        (3, 0.1851156353447362e+0, 0, 0.8211737283191111e-2),
        (3, 0.6904210483822922e+0, 0, 0.9942814891178103e-2),
        (3, 0.3956894730559419e+0, 0, 0.9595471336070963e-2),
        (4, 0.4783690288121502e+0, 0, 0.9694996361663028e-2),
    ),
    146: (
        (0, 0, 0, 0.5996313688621381e-3),
        (1, 0, 0, 0.7372999718620756e-2),
        (2, 0, 0, 0.7210515360144488e-2),
        (3, 0.6764410400114264e+0, 0, 0.7116355493117555e-2),
        (3, 0.4174961227965453e+0, 0, 0.6753829486314477e-2),
        (3, 0.1574676672039082e+0, 0, 0.7574394159054034e-2),
        (5, 0.1403553811713183e+0, 0.4493328323269557e+0, 0.6991087353303262e-2),
    ),
    170: (
        (0, 0, 0, 0.5544842902037365e-2),
        (1, 0, 0, 0.6071332770670752e-2),
        (2, 0, 0, 0.6383674773515093e-2),
        (3, 0.2551252621114134e+0, 0, 0.5183387587747790e-2),
        (3, 0.6743601460362766e+0, 0, 0.6317929009813725e-2),
        (3, 0.4318910696719410e+0, 0, 0.6201670006589077e-2),
        (4, 0.2613931360335988e+0, 0, 0.5477143385137348e-2),
        (5, 0.4990453161796037e+0, 0.1446630744325115e+0, 0.5968383987681156e-2),
    ),
    194: (
        (0, 0, 0, 0.1782340447244611e-2),
        (1, 0, 0, 0.5716905949977102e-2),
        (2, 0, 0, 0.5573383178848738e-2),
        (3, 0.6712973442695226e+0, 0, 0.5608704082587997e-2),
        (3, 0.2892465627575439e+0, 0, 0.5158237711805383e-2),
        (3, 0.4446933178717437e+0, 0, 0.5518771467273614e-2),
        (3, 0.1299335447650067e+0, 0, 0.4106777028169394e-2),
        (4, 0.3457702197611283e+0, 0, 0.5051846064614808e-2),
        (5, 0.1590417105383530e+0, 0.8360360154824589e+0, 0.5530248916233094e-2),
    ),
    230: (
        (0, 0, 0, -0.5522639919727325e-1),
        (2, 0, 0, 0.4450274607445226e-2),
        (3, 0.4492044687397611e+0, 0, 0.4496841067921404e-2),
        (3, 0.2520419490210201e+0, 0, 0.5049153450478750e-2),
        (3, 0.6981906658447242e+0, 0, 0.3976408018051883e-2),
        (3, 0.6587405243460960e+0, 0, 0.4401400650381014e-2),
        (3, 0.4038544050097660e-1, 0, 0.1724544350544401e-1),
        (4, 0.5823842309715585e+0, 0, 0.4231083095357343e-2),
        (4, 0.3545877390518688e+0, 0, 0.5198069864064399e-2),
        (5, 0.2272181808998187e+0, 0.4864661535886647e+0, 0.4695720972568883e-2),
    ),
    266: (
        (0, 0, 0, -0.1313769127326952e-2),
        (1, 0, 0, -0.2522728704859336e-2),
        (2, 0, 0, 0.4186853881700583e-2),
        (3, 0.7039373391585475e+0, 0, 0.5315167977810885e-2),
        (3, 0.1012526248572414e+0, 0, 0.4047142377086219e-2),
        (3, 0.4647448726420539e+0, 0, 0.4112482394406990e-2),
        (3, 0.3277420654971629e+0, 0, 0.3595584899758782e-2),
        (3, 0.6620338663699974e+0, 0, 0.4256131351428158e-2),
        (4, 0.8506508083520399e+0, 0, 0.4229582700647240e-2),
        (5, 0.3233484542692899e+0, 0.1153112011009701e+0, 0.4080914225780505e-2),
        (5, 0.2314790158712601e+0, 0.5244939240922365e+0, 0.4071467593830964e-2),
    ),
    302: (
        (0, 0, 0, 0.8545911725128148e-3),
        (2, 0, 0, 0.3599119285025571e-2),
        (3, 0.3515640345570105e+0, 0, 0.3449788424305883e-2),
        (3, 0.6566329410219612e+0, 0, 0.3604822601419882e-2),
        (3, 0.4729054132581005e+0, 0, 0.3576729661743367e-2),
        (3, 0.9618308522614784e-1, 0, 0.2352101413689164e-2),
        (3, 0.2219645236294178e+0, 0, 0.3108953122413675e-2),
        (3, 0.7011766416089545e+0, 0, 0.3650045807677255e-2),
        (4, 0.2644152887060663e+0, 0, 0.2982344963171804e-2),
        (4, 0.5718955891878961e+0, 0, 0.3600820932216460e-2),
        (5, 0.2510034751770465e+0, 0.8000727494073952e+0, 0.3571540554273387e-2),
        (5, 0.1233548532583327e+0, 0.4127724083168531e+0, 0.3392312205006170e-2),
    ),
    350: (
        (0, 0, 0, 0.3006796749453936e-2),
        (2, 0, 0, 0.3050627745650771e-2),
        (3, 0.7068965463912316e+0, 0, 0.1621104600288991e-2),
        (3, 0.4794682625712025e+0, 0, 0.3005701484901752e-2),
        (3, 0.1927533154878019e+0, 0, 0.2990992529653774e-2),
        (3, 0.6930357961327123e+0, 0, 0.2982170644107595e-2),
        (3, 0.3608302115520091e+0, 0, 0.2721564237310992e-2),
        (3, 0.6498486161496169e+0, 0, 0.3033513795811141e-2),
        (4, 0.1932945013230339e+0, 0, 0.3007949555218533e-2),
        (4, 0.3800494919899303e+0, 0, 0.2881964603055307e-2),
        (5, 0.2899558825499574e+0, 0.7934537856582316e+0, 0.2958357626535696e-2),
        (5, 0.9684121455103957e-1, 0.8280801506686862e+0, 0.3036020026407088e-2),
        (5, 0.1833434647041659e+0, 0.9074658265305127e+0, 0.2832187403926303e-2),
    ),
    434: (
        (0, 0, 0, 0.5265897968224436e-3),
        (1, 0, 0, 0.2548219972002607e-2),
        (2, 0, 0, 0.2512317418927307e-2),
        (3, 0.6909346307509111e+0, 0, 0.2530403801186355e-2),
        (3, 0.1774836054609158e+0, 0, 0.2014279020918528e-2),
        (3, 0.4914342637784746e+0, 0, 0.2501725168402936e-2),
        (3, 0.6456664707424256e+0, 0, 0.2513267174597564e-2),
        (3, 0.2861289010307638e+0, 0, 0.2302694782227416e-2),
        (3, 0.7568084367178018e-1, 0, 0.1462495621594614e-2),
        (3, 0.3927259763368002e+0, 0, 0.2445373437312980e-2),
        (4, 0.8818132877794288e+0, 0, 0.2417442375638981e-2),
        (4, 0.9776428111182649e+0, 0, 0.1910951282179532e-2),
        (5, 0.2054823696403044e+0, 0.8689460322872412e+0, 0.2416930044324775e-2),
        (5, 0.5905157048925271e+0, 0.7999278543857286e+0, 0.2512236854563495e-2),
        (5, 0.5550152361076807e+0, 0.7717462626915901e+0, 0.2496644054553086e-2),
        (5, 0.9371809858553722e+0, 0.3344363145343455e+0, 0.2236607760437849e-2),
    ),
    590: (
        (0, 0, 0, 0.3095121295306187e-3),
        (2, 0, 0, 0.1852379698597489e-2),
        (3, 0.7040954938227469e+0, 0, 0.1871790639277744e-2),
        (3, 0.6807744066455243e+0, 0, 0.1858812585438317e-2),
        (3, 0.6372546939258752e+0, 0, 0.1852028828296213e-2),
        (3, 0.5044419707800358e+0, 0, 0.1846715956151242e-2),
        (3, 0.4215761784010967e+0, 0, 0.1818471778162769e-2),
        (3, 0.3317920736472123e+0, 0, 0.1749564657281154e-2),
        (3, 0.2384736701421887e+0, 0, 0.1617210647254411e-2),
        (3, 0.1459036449157763e+0, 0, 0.1384737234851692e-2),
        (3, 0.6095034115507196e-1, 0, 0.9764331165051050e-3),
        (4, 0.6116843442009876e+0, 0, 0.1857161196774078e-2),
        (4, 0.3964755348199858e+0, 0, 0.1705153996395864e-2),
        (4, 0.1724782009907724e+0, 0, 0.1300321685886048e-2),
        (5, 0.5610263808622060e+0, 0.3518280927733519e+0, 0.1842866472905286e-2),
        (5, 0.4742392842551980e+0, 0.2634716655937950e+0, 0.1802658934377451e-2),
        (5, 0.5984126497885380e+0, 0.1816640840360209e+0, 0.1849830560443660e-2),
        (5, 0.3791035407695563e+0, 0.1720795225656878e+0, 0.1713904507106709e-2),
        (5, 0.2778673190586244e+0, 0.8213021581932511e-1, 0.1555213603396808e-2),
        (5, 0.5033564271075117e+0, 0.8999205842074875e-1, 0.1802239128008525e-2),
    ),
    770: (
        (0, 0, 0, 0.2192942088181184e-3),
        (1, 0, 0, 0.1436433617319080e-2),
        (2, 0, 0, 0.1421940344335877e-2),
        (3, 0.5087204410502360e-1, 0, 0.6798123511050502e-3),
        (3, 0.1228198790178831e+0, 0, 0.9913184235294912e-3),
        (3, 0.2026890814408786e+0, 0, 0.1180207833238949e-2),
        (3, 0.2847745156464294e+0, 0, 0.1296599602080921e-2),
        (3, 0.3656719078978026e+0, 0, 0.1365871427428316e-2),
        (3, 0.4428264886713469e+0, 0, 0.1402988604775325e-2),
        (3, 0.5140619627249735e+0, 0, 0.1418645563595609e-2),
        (3, 0.6306401219166803e+0, 0, 0.1421376741851662e-2),
        (3, 0.6716883332022612e+0, 0, 0.1423996475490962e-2),
        (3, 0.6979792685336881e+0, 0, 0.1431554042178567e-2),
        (4, 0.1446865674195309e+0, 0, 0.9254401499865368e-3),
        (4, 0.3390263475411216e+0, 0, 0.1250239995053509e-2),
        (4, 0.5335804651263506e+0, 0, 0.1394365843329230e-2),
        (5, 0.6944024393349413e-1, 0.2355187894242326e+0, 0.1127089094671749e-2),
        (5, 0.2269004109529460e+0, 0.4102182474045730e+0, 0.1345753760910670e-2),
        (5, 0.8025574607775339e-1, 0.6214302417481605e+0, 0.1424957283316783e-2),
        (5, 0.1467999527896572e+0, 0.3245284345717394e+0, 0.1261523341237750e-2),
        (5, 0.1571507769824727e+0, 0.5224482189696630e+0, 0.1392547106052696e-2),
        (5, 0.2365702993157246e+0, 0.6017546634089558e+0, 0.1418761677877656e-2),
        (5, 0.7714815866765732e-1, 0.4346575516141163e+0, 0.1338366684479554e-2),
        (5, 0.3062936666210730e+0, 0.4908826589037616e+0, 0.1393700862676131e-2),
        (5, 0.3822477379524787e+0, 0.5648768149099500e+0, 0.1415914757466932e-2),
    ),
}
